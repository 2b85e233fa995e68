import numpy as np
import pytest

from ewvac.fields import GridField, get_calc
from ewvac.green import GreenError, GreenOp, apply, apply_diff
from ewvac.lattice import make_grid


def test_constant_input(hex_shape):
    grid = make_grid(hex_shape, 16)
    c = GridField(np.full((16, 16), 4.0), 0, grid)
    out = apply(GreenOp(m=2.0, grid=grid), c)
    assert np.abs(out.values - 1.0).max() < 1e-13


def test_plane_wave_diagonal(hex_shape):
    grid = make_grid(hex_shape, 16)
    K1 = hex_shape.K1
    k2 = float(K1 @ K1)
    f = np.exp(1j * (K1[0] * grid.x1 + K1[1] * grid.x2))
    out = apply(GreenOp(m=1.5, grid=grid), GridField(f, 0, grid))
    assert np.abs(out.values - f / (k2 + 1.5**2)).max() < 1e-13


def test_zero_mass_residual_oracle(chi_hex64):
    grid = chi_hex64.beta.grid
    calc = get_calc(grid, 0)
    f = chi_hex64.density - 1.0
    out = apply(GreenOp(m=0.0, grid=grid), GridField(f, 0, grid))
    assert abs(float(np.mean(out.values))) < 1e-12
    resid = -calc.slap(out.values) - f
    assert np.abs(resid).max() < 1e-9 * np.abs(f).max()


def test_zero_mass_rejects_mean(hex_shape):
    grid = make_grid(hex_shape, 16)
    with pytest.raises(GreenError):
        apply(GreenOp(m=0.0, grid=grid), GridField(np.ones((16, 16)), 0, grid))


def test_diff_zero_and_constant(hex_shape):
    grid = make_grid(hex_shape, 16)
    c = GridField(np.full((16, 16), 2.0), 0, grid)
    out = apply_diff(1.3, 1.3, c)
    assert np.abs(out.values).max() < 1e-14
    out2 = apply_diff(1.0, 2.0, c)
    assert np.abs(out2.values - 2.0 * (1.0 - 0.25)).max() < 1e-13


def test_diff_positivity_on_chi_density(chi_hex64, params):
    # G_{m_z} - G_{m_h} is positivity preserving for m_z < m_h
    grid = chi_hex64.beta.grid
    assert params.m_z < params.m_h
    out = apply_diff(params.m_z, params.m_h, GridField(chi_hex64.density, 0, grid))
    assert out.values.min() > 0.0


def test_diff_requires_positive_masses(hex_shape):
    grid = make_grid(hex_shape, 16)
    with pytest.raises(GreenError):
        apply_diff(0.0, 1.0, GridField(np.ones((16, 16)), 0, grid))


def test_self_adjointness(hex_shape, rng):
    grid = make_grid(hex_shape, 24)
    calc = get_calc(grid, 0)
    f = rng.normal(size=(24, 24))
    g = rng.normal(size=(24, 24))
    G = GreenOp(m=1.1, grid=grid)
    lhs = calc.ip(apply(G, GridField(f, 0, grid)).values, g)
    rhs = calc.ip(f, apply(G, GridField(g, 0, grid)).values)
    assert abs(lhs - rhs) < 1e-11 * max(abs(lhs), 1.0)


def test_resolvent_identity(hex_shape, rng):
    # G_{m1} - G_{m2} = (m2^2 - m1^2) G_{m1} G_{m2}
    grid = make_grid(hex_shape, 24)
    f = GridField(rng.normal(size=(24, 24)), 0, grid)
    m1, m2 = 0.9, 2.3
    lhs = apply_diff(m1, m2, f).values
    rhs = (m2**2 - m1**2) * apply(GreenOp(m=m1, grid=grid),
                                  apply(GreenOp(m=m2, grid=grid), f)).values
    assert np.abs(lhs - rhs).max() < 1e-10 * np.abs(lhs).max()


def test_vector_input_rejected(hex_shape):
    grid = make_grid(hex_shape, 16)
    with pytest.raises(GreenError):
        apply(GreenOp(m=1.0, grid=grid), GridField(np.zeros((2, 16, 16)), 0, grid))
