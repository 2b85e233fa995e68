import math

import numpy as np
import pytest

from ewvac.bifurcation import (BranchError, alpha_eta, ansatz_state,
                               current_divergence_weak, energy_expansion,
                               first_order, first_order_residuals, newton_branch,
                               phi0_identity, s4_bracket, s4_bracket_closed_form,
                               s_squared_of_omega, _get_space)
from ewvac.energy import energy
from ewvac.lattice import LatticeShape, make_grid
from ewvac.lll import build_chi

TAU_HEX = complex(0.5, math.sqrt(3.0) / 2)


@pytest.fixture(scope="module")
def fo_hex(chi_hex64, params, hex_grid64):
    return first_order(chi_hex64, params, hex_grid64)


def test_first_order_equation_residuals(fo_hex, params, hex_grid64):
    # direct substitution into the three screened Poisson problems
    res = first_order_residuals(fo_hex, params, hex_grid64)
    assert max(res.values()) < 1e-9


def test_first_order_divfree_and_signs(fo_hex, params, hex_grid64):
    from ewvac.fields import get_calc
    calc = get_calc(hex_grid64, 0)
    assert np.abs(calc.sdiv(fo_hex.a1)).max() < 1e-9
    assert np.abs(calc.sdiv(fo_hex.z1)).max() < 1e-9
    assert fo_hex.psi1.max() < 0.0     # psi' strictly negative
    assert fo_hex.xi1 < 0.0            # xi' < 0 for m_z < m_h
    assert fo_hex.eta > 0.0 and fo_hex.alpha > 0.0


def test_curl_a1_pointwise(fo_hex, params, hex_grid64):
    from ewvac.fields import get_calc
    calc = get_calc(hex_grid64, 0)
    target = params.e * (fo_hex.f - float(np.mean(fo_hex.f)))
    assert np.abs(calc.scurl(fo_hex.a1) - target).max() < 1e-9 * params.e
    assert abs(float(np.mean(calc.scurl(fo_hex.a1)))) < 1e-12 * params.e


def test_phi0_scalar_identity(fo_hex, params):
    # both sides evaluated independently: quadrature vs the eta-based xi'
    lhs, rhs = phi0_identity(fo_hex, params)
    assert abs(lhs - rhs) < 1e-9 * abs(lhs)


def test_s4_bracket_closed_form(fo_hex, params, hex_grid64):
    br = s4_bracket(fo_hex, params, hex_grid64)
    cf = s4_bracket_closed_form(fo_hex, params)
    assert abs(br - cf) < 1e-7 * abs(cf)


def test_alpha_eta_values(chi_hex64, chi_square64, params, hex_grid64):
    a_h, e_h, b_h = alpha_eta(chi_hex64, params, hex_grid64)
    grid_sq = chi_square64.beta.grid
    a_s, e_s, b_s = alpha_eta(chi_square64, params, grid_sq)
    assert abs(b_h - 1.159595) < 1e-4   # Abrikosov ratio cross-check
    assert abs(b_s - 1.180340) < 1e-4
    assert e_h > e_s > 0
    assert a_h > 0 and a_s > 0


def test_alpha_eta_degenerate_masses(chi_hex64, hex_grid64):
    # m_z = m_h: the Green difference vanishes, alpha = 0, eta = 1/sin^2(theta)
    from ewvac.params import from_masses
    p = from_masses(80.379, 91.1876, 125.09, 1)
    pdeg = type(p)(g=p.g, gprime=p.gprime, lam=p.g**2 * p.m_z**2 / 4.0,
                   phi0=p.phi0, n=1)
    assert abs(pdeg.m_h - pdeg.m_z) < 1e-12
    a, e, _ = alpha_eta(chi_hex64, pdeg, hex_grid64)
    assert abs(a) < 1e-14
    assert abs(e - 1.0 / pdeg.sin2_theta) < 1e-10


def test_eta_modular_invariance(params):
    # tau, tau+1 and -1/tau describe the same lattice
    ingrid = 0.28 + 1.07j
    vals = []
    for tau in (ingrid, ingrid + 1.0, -1.0 / ingrid):
        from ewvac.lattice import reduce_to_fundamental
        tr, _ = reduce_to_fundamental(tau)
        sh = LatticeShape(tau=tr)
        grid = make_grid(sh, 64)
        _, e, _ = alpha_eta(build_chi(sh, 1, grid=grid), params, grid)
        vals.append(e)
    assert abs(vals[1] - vals[0]) < 1e-6 * vals[0]
    assert abs(vals[2] - vals[0]) < 1e-6 * vals[0]


def test_s_squared_leading(chi_hex64, params, hex_grid64):
    assert s_squared_of_omega(0.0, chi_hex64, params, hex_grid64) == 0.0
    s1 = s_squared_of_omega(0.01, chi_hex64, params, hex_grid64)
    s2 = s_squared_of_omega(0.02, chi_hex64, params, hex_grid64)
    assert abs(s2 - 2.0 * s1) < 1e-15
    assert s1 > 0


def test_energy_expansion_properties(params):
    e_hex = energy_expansion(0.01, TAU_HEX, params, N=48)
    e_sq = energy_expansion(0.01, 1j, params, N=48)
    b = params.b_of_omega(0.01)
    assert e_hex < 0.5 * b**2
    assert e_hex < e_sq  # the hexagonal lattice wins
    assert energy_expansion(0.0, TAU_HEX, params, N=48) == pytest.approx(
        0.5 * params.b_star**2)


def test_ansatz_energy_expansion_slope(chi_hex64, params, hex_grid64, fo_hex):
    # per-cell energy of the truncated ansatz minus the s^4 prediction is O(s^6)
    base = 0.5 * params.n**2 / params.e**2
    bracket = s4_bracket(fo_hex, params, hex_grid64)
    xs, ds = [], []
    for s in (0.05, 0.1, 0.2):
        st, dxi = ansatz_state(s, chi_hex64, fo_hex)
        xi_s = math.sqrt(2.0 * params.n) / params.g + dxi
        eb = energy(st, params, xi_s, hex_grid64)
        D = abs(eb.per_cell - base - s**4 * bracket)
        xs.append(s)
        ds.append(D)
    slope = np.polyfit(np.log(xs), np.log(ds), 1)[0]
    assert slope >= 5.5


@pytest.fixture(scope="module")
def branch_01(params):
    shape = LatticeShape(tau=TAU_HEX)
    return newton_branch(0.01, params, shape, grid_N=32)


def test_branch_converges(branch_01):
    assert branch_01.converged
    assert branch_01.residual_norm < 1e-8
    assert branch_01.s > 0


def test_branch_s2_matches_leading(branch_01, chi_hex64, params, hex_grid64):
    # cross-oracle: independent theta-state quadrature coefficient within 5%
    lead_theta = s_squared_of_omega(0.01, chi_hex64, params, hex_grid64)
    assert abs(branch_01.s**2 - lead_theta) < 0.05 * lead_theta


def test_branch_energy_below_vacuum(branch_01):
    assert branch_01.energy_per_area < 0.5 * branch_01.b**2


def test_branch_current_conservation(branch_01, params):
    shape = LatticeShape(tau=TAU_HEX)
    grid = _get_space(shape, 1, 32, 14, 10).grid
    assert current_divergence_weak(branch_01, params, grid) < 1e-8


def test_branch_mean_alpha_vanishes(branch_01):
    # parity of the symmetric seed freezes the constant photon mode
    assert np.abs(branch_01.c).max() < 1e-12


def test_branch_parity_in_s(params):
    shape = LatticeShape(tau=TAU_HEX)
    pp = newton_branch(0.01, params, shape, grid_N=32, s_sign=+1)
    pm = newton_branch(0.01, params, shape, grid_N=32, s_sign=-1)
    assert abs(pp.s + pm.s) < 1e-12
    assert np.abs(pp.state.w + pm.state.w).max() < 1e-10 * np.abs(pp.state.w).max()
    for att in ("alpha", "z", "psi"):
        a, b = getattr(pp.state, att), getattr(pm.state, att)
        sc = max(np.abs(a).max(), 1e-30)
        assert np.abs(a - b).max() < 1e-10 * sc


def test_branch_rejects_stable_regime(params):
    with pytest.raises(BranchError):
        newton_branch(-0.01, params, LatticeShape(tau=TAU_HEX), grid_N=32)


def test_branch_rejects_higher_flux():
    from ewvac.params import from_masses
    p2 = from_masses(80.379, 91.1876, 125.09, 2)
    with pytest.raises(BranchError):
        newton_branch(0.01, p2, LatticeShape(tau=TAU_HEX), grid_N=32)
