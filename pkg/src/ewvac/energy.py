"""Rescaled energy per cell, its exact discrete gradient, and consistency checks.

The energy is the nine-term functional

    E = int  |curl_nu w|^2 + (1/2)|curl a|^2 + (1/2)|curl z|^2
         + (g^2/2) phi^2 |w|^2 + (kappa/2) phi^2 |z|^2 + (g^2/2)|wbar x w|^2
         + i (curl nu) (wbar x w) + |grad phi|^2 + (lambda/2)(phi^2 - xi^2)^2

with nu = g(a sin(theta) + z cos(theta)), a = a^n/e + alpha, phi = xi + psi.
The background enters analytically: curl a = n/e + curl(alpha) and
curl nu = n + curl(nutilde), so no linear-in-x quantity is ever
differentiated numerically.

The residual map returns the *exact* gradient of the discrete energy: the
w-block derivatives go through the same one-sided link-phase curls that the
energy uses, and the alpha/z-blocks include the adjoint of the Fourier
line-integral map that feeds the links.  Consequently the finite-difference
gradient test passes at rounding level, the residual is exactly equivariant
under the global phase map T_delta, and gauge transformations leave the
energy invariant to rounding.

The real L^2 pairing carries block weights (2, 1, 1, 2): the w and phi
Gateaux derivatives of the energy are twice the corresponding residual
components (complex field, and the 2 factored out of the phi variation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import FieldState, get_calc
from .lattice import Grid
from .params import PhysParams

TERM_NAMES = (
    "curl_w", "curl_a", "curl_z", "phi2_w2", "phi2_z2",
    "wxw2", "supercurrent", "grad_phi", "higgs",
)


@dataclass
class EnergyBreakdown:
    """Raw cell integrals of the nine energy densities plus totals."""

    terms: dict
    total: float
    per_cell: float

    def as_dict(self) -> dict:
        return {"terms": self.terms, "total": self.total, "per_cell": self.per_cell}


def _nutilde(state: FieldState, p: PhysParams) -> np.ndarray:
    return p.g * (math.sin(p.theta) * state.alpha + math.cos(p.theta) * state.z)


def _wxw(w: np.ndarray) -> np.ndarray:
    """wbar x w = conj(w1) w2 - conj(w2) w1 (purely imaginary)."""
    return np.conj(w[0]) * w[1] - np.conj(w[1]) * w[0]


def energy(state: FieldState, p: PhysParams, xi: float, grid: Grid) -> EnergyBreakdown:
    """Rescaled energy over one cell; vacuum state gives per-cell n^2/(2 e^2)."""
    n = p.n
    cf = get_calc(grid, n)
    cp = get_calc(grid, 0)
    nut = _nutilde(state, p)
    links = cf.link_phases(nut)
    w, z, psi = state.w, state.z, state.psi
    phi = xi + psi

    Cp = cf.curl_pm(w, +1, links)
    Cm = cf.curl_pm(w, -1, links)
    curl_a = n / p.e + cp.scurl(state.alpha)
    curl_nu = n + cp.scurl(nut)
    q = (1j * _wxw(w)).real  # i (wbar x w), real
    absw2 = np.abs(w[0]) ** 2 + np.abs(w[1]) ** 2
    absz2 = z[0] ** 2 + z[1] ** 2
    gpsi = cp.sgrad(psi)

    wgt = cf.node_weight
    terms = {
        "curl_w": 0.5 * wgt * float((np.abs(Cp) ** 2 + np.abs(Cm) ** 2).sum()),
        "curl_a": 0.5 * wgt * float((curl_a**2).sum()),
        "curl_z": 0.5 * wgt * float((cp.scurl(z) ** 2).sum()),
        "phi2_w2": 0.5 * p.g**2 * wgt * float((phi**2 * absw2).sum()),
        "phi2_z2": 0.5 * p.kappa * wgt * float((phi**2 * absz2).sum()),
        "wxw2": 0.5 * p.g**2 * wgt * float((np.abs(_wxw(w)) ** 2).sum()),
        "supercurrent": wgt * float((curl_nu * q).sum()),
        "grad_phi": wgt * float((gpsi[0] ** 2 + gpsi[1] ** 2).sum()),
        "higgs": 0.5 * p.lam * wgt * float(((phi**2 - xi**2) ** 2).sum()),
    }
    total = float(sum(terms.values()))
    return EnergyBreakdown(terms=terms, total=total, per_cell=total / (2.0 * math.pi))


def residual(state: FieldState, p: PhysParams, xi: float, grid: Grid):
    """Exact discrete gradient of the energy: the four fields (G1, G2, G3, G4).

    G1 is complex on the flux sector; G2, G3 are real periodic vector fields;
    G4 is a real periodic scalar.  The pairing against directions uses block
    weights (2, 1, 1, 2), see pair_real().
    """
    n = p.n
    cf = get_calc(grid, n)
    cp = get_calc(grid, 0)
    sin_t, cos_t = math.sin(p.theta), math.cos(p.theta)
    nut = _nutilde(state, p)
    links = cf.link_phases(nut)
    E1, E2 = links
    w, z, psi = state.w, state.z, state.psi
    phi = xi + psi

    Cp = cf.curl_pm(w, +1, links)
    Cm = cf.curl_pm(w, -1, links)
    curl_nu = n + cp.scurl(nut)
    wxw = _wxw(w)
    q = (1j * wxw).real
    absw2 = np.abs(w[0]) ** 2 + np.abs(w[1]) ** 2
    absz2 = z[0] ** 2 + z[1] ** 2
    Jw = np.stack([-w[1], w[0]])

    # G1: Wirtinger derivative w.r.t. conj(w)
    G1 = 0.5 * (cf.curl_adj_pm(Cp, -1, links) + cf.curl_adj_pm(Cm, +1, links))
    G1 = G1 + (0.5 * p.g**2 * phi**2) * w - 1j * curl_nu * Jw + p.g**2 * wxw * Jw

    # link current: exact derivative of the |curl_nu w|^2 terms w.r.t. the
    # link phases Theta_a, pulled back through the line-integral map
    N = cf.N
    Lsum = np.zeros((2, N, N))
    for a, (E, kap) in enumerate(((E1, cf.kap1), (E2, cf.kap2))):
        sa = kap[0] * w[1] - kap[1] * w[0]
        Wa = E * cf.translate(sa, a, +1)
        rho = N * (
            (np.conj(Cp) * Wa).imag
            + (np.conj(cf.translate(Cm, a, +1)) * np.conj(E) * sa).imag
        )
        Lsum = Lsum + cf.line_integral_adj(rho, a)
    jcur = Lsum + cp.scurl_adj(q)

    G2 = cp.scurl_adj(cp.scurl(state.alpha)) + p.g * sin_t * jcur
    G3 = cp.scurl_adj(cp.scurl(z)) + p.kappa * phi**2 * z + p.g * cos_t * jcur
    G4 = -cp.slap(psi) + (p.lam * (phi**2 - xi**2) + 0.5 * p.g**2 * absw2
                          + 0.5 * p.kappa * absz2) * phi
    return G1, G2, G3, G4


def apply_linearization(u: FieldState, p: PhysParams, mu: float, grid: Grid) -> FieldState:
    """L_{n,mu} u = (H1 w, H2 alpha, H3 z, H4 psi), same stencils as residual().

    H1 = curl*curl_{a^n} + mu - n iJ, H2 = curl*curl,
    H3 = curl*curl + mu/cos^2(theta), H4 = -Delta + 4 lambda mu / g^2.
    """
    n = p.n
    cf = get_calc(grid, n)
    cp = get_calc(grid, 0)
    links = cf.link_phases(None)
    Jw = np.stack([-u.w[1], u.w[0]])
    H1w = cf.curlcurl_sym(u.w, links) + mu * u.w - n * 1j * Jw
    H2a = cp.scurl_adj(cp.scurl(u.alpha))
    H3z = cp.scurl_adj(cp.scurl(u.z)) + (mu / math.cos(p.theta) ** 2) * u.z
    H4p = -cp.slap(u.psi) + (4.0 * p.lam * mu / p.g**2) * u.psi
    return FieldState(w=H1w, alpha=H2a, z=H3z, psi=H4p)


def pair_real(res, direction: FieldState, grid: Grid) -> float:
    """Real L^2 pairing <G, d> with block weights (2, 1, 1, 2)."""
    G1, G2, G3, G4 = res
    wgt = 2.0 * math.pi / grid.N**2
    val = 2.0 * float((np.conj(G1) * direction.w).real.sum())
    val += float((G2 * direction.alpha).sum())
    val += float((G3 * direction.z).sum())
    val += 2.0 * float((G4 * direction.psi).sum())
    return wgt * val


def state_axpy(s: FieldState, t: float, d: FieldState) -> FieldState:
    return FieldState(w=s.w + t * d.w, alpha=s.alpha + t * d.alpha,
                      z=s.z + t * d.z, psi=s.psi + t * d.psi)


def gradient_check(state: FieldState, p: PhysParams, xi: float, grid: Grid,
                   direction: FieldState, step: float = 1e-4) -> float:
    """Relative mismatch between <residual, direction> and the Richardson
    finite difference of the energy along the direction."""
    lhs = pair_real(residual(state, p, xi, grid), direction, grid)

    def ev(t):
        return energy(state_axpy(state, t, direction), p, xi, grid).total

    d1 = (ev(step) - ev(-step)) / (2.0 * step)
    d2 = (ev(0.5 * step) - ev(-0.5 * step)) / step
    fd = (4.0 * d2 - d1) / 3.0
    scale = max(abs(lhs), abs(fd), 1e-12 * max(abs(ev(0.0)), 1.0))
    return abs(lhs - fd) / scale


def t_delta(state: FieldState, delta: float) -> FieldState:
    """Global transformation (w, alpha, z, psi) -> (e^{i delta} w, alpha, z, psi)."""
    return FieldState(w=np.exp(1j * delta) * state.w, alpha=state.alpha.copy(),
                      z=state.z.copy(), psi=state.psi.copy())


def residual_norms(res, grid: Grid):
    """Block L^2 norms of a residual quadruple."""
    cf_w = 2.0 * math.pi / grid.N**2
    G1, G2, G3, G4 = res
    return {
        "w": math.sqrt(cf_w * float((np.abs(G1) ** 2).sum())),
        "alpha": math.sqrt(cf_w * float((G2**2).sum())),
        "z": math.sqrt(cf_w * float((G3**2).sum())),
        "psi": math.sqrt(cf_w * float((G4**2).sum())),
    }
