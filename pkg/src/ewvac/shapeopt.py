"""Lattice-shape optimization over the modular fundamental domain.

The energy-minimizing lattice near threshold maximizes the shape function
eta(tau) = 1/(n alpha(tau) + sin^2 theta).  scan_eta rasters eta over the
fundamental domain |tau| >= 1, -1/2 < Re tau <= 1/2 (with an Im cap, since
eta decays for needle-shaped cells) and refine_max polishes the argmax with
a derivative-free simplex search that re-reduces tau modulo SL(2,Z) on every
evaluation, so steps across the domain boundary are harmless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bifurcation import alpha_eta
from .lattice import LatticeShape, make_grid, reduce_to_fundamental
from .lll import build_chi
from .params import PhysParams

TAU_HEX = complex(math.cos(math.pi / 3.0), math.sin(math.pi / 3.0))


class ShapeScanError(ValueError):
    pass


@dataclass
class ShapeScan:
    """Raster of the shape functions over the fundamental domain."""

    re_tau: np.ndarray
    im_tau: np.ndarray
    eta: np.ndarray       # (n_im, n_re), NaN outside the domain
    alpha: np.ndarray
    beta: np.ndarray
    argmax_tau: complex
    N: int
    flat: bool
    meta: dict = field(default_factory=dict)

    def rows(self):
        """CSV-friendly (re_tau, im_tau, eta, alpha, beta) rows, domain points only."""
        out = []
        for i, im in enumerate(self.im_tau):
            for j, re in enumerate(self.re_tau):
                if np.isfinite(self.eta[i, j]):
                    out.append((re, im, self.eta[i, j], self.alpha[i, j], self.beta[i, j]))
        return out


def eta_at(tau: complex, p: PhysParams, N: int = 64) -> tuple:
    """(alpha, eta, beta) at an arbitrary tau, reduced into the domain first."""
    tau_r, _ = reduce_to_fundamental(complex(tau))
    shape = LatticeShape(tau=tau_r)
    grid = make_grid(shape, N)
    chi = build_chi(shape, p.n, grid=grid)
    return alpha_eta(chi, p, grid)


def scan_eta(p: PhysParams, resolution: int = 40, N: int = 64,
             im_max: float = 2.0) -> ShapeScan:
    """Raster eta over the fundamental domain.

    Raster points with |tau| < 1 are skipped (NaN).  For m_z = m_h the
    operator difference vanishes and the landscape is flat; the scan flags
    this instead of reporting a spurious argmax.
    """
    if resolution < 2:
        raise ShapeScanError("resolution must be at least 2")
    if im_max <= math.sqrt(3.0) / 2.0:
        raise ShapeScanError("empty scan window: im_max must exceed sqrt(3)/2")
    if p.m_z > p.m_h:
        raise ShapeScanError("scan requires m_z <= m_h (M_Z <= M_H)")
    res = resolution
    re_tau = np.linspace(-0.5, 0.5, res + 1)[1:]      # half-open (-1/2, 1/2]
    im_tau = np.linspace(math.sqrt(3.0) / 2.0, im_max, res)
    eta = np.full((res, res), np.nan)
    alpha = np.full((res, res), np.nan)
    beta = np.full((res, res), np.nan)
    for i, im in enumerate(im_tau):
        for j, re in enumerate(re_tau):
            tau = complex(re, im)
            if abs(tau) < 1.0 - 1e-12:
                continue
            shape = LatticeShape(tau=tau)
            grid = make_grid(shape, N)
            chi = build_chi(shape, p.n, grid=grid)
            a, e, b = alpha_eta(chi, p, grid)
            alpha[i, j], eta[i, j], beta[i, j] = a, e, b
    finite = np.isfinite(eta)
    if not finite.any():
        raise ShapeScanError("scan produced no valid tau samples")
    vals = eta[finite]
    flat = bool(np.ptp(vals) < 1e-10 * max(abs(vals.mean()), 1.0))
    i, j = np.unravel_index(np.nanargmax(eta), eta.shape)
    return ShapeScan(re_tau=re_tau, im_tau=im_tau, eta=eta, alpha=alpha, beta=beta,
                     argmax_tau=complex(re_tau[j], im_tau[i]), N=N, flat=flat,
                     meta={"resolution": res, "im_max": im_max})


def refine_max(scan: ShapeScan, p: PhysParams, tol: float = 1e-3,
               N: int | None = None) -> dict:
    """Polish the raster argmax with Nelder-Mead on -eta(reduce(tau)).

    Returns {"tau_star", "eta_star", "trace", "warning"}.  The best-vertex
    value is non-decreasing along the trace by construction of the simplex
    method.  A maximum on the top (Im) edge of the raster is not refined.
    """
    N = scan.N if N is None else N
    if scan.flat:
        return {"tau_star": None, "eta_star": float(np.nanmean(scan.eta)),
                "trace": [], "warning": "flat landscape (m_z = m_h): eta is "
                "constant in tau, no shape preference"}
    i, j = np.unravel_index(np.nanargmax(scan.eta), scan.eta.shape)
    if i == len(scan.im_tau) - 1:
        return {"tau_star": scan.argmax_tau, "eta_star": float(scan.eta[i, j]),
                "trace": [], "warning": "raster maximum on the Im tau boundary; "
                "enlarge the window before refining"}
    trace = []

    def neg_eta(x):
        _, e, _ = eta_at(complex(x[0], x[1]), p, N)
        trace.append(e)
        return -e

    x0 = np.array([scan.argmax_tau.real, scan.argmax_tau.imag])
    dre = scan.re_tau[1] - scan.re_tau[0]
    dim = scan.im_tau[1] - scan.im_tau[0]
    simplex = np.array([x0, x0 + [dre, 0.0], x0 + [0.0, dim]])
    res = minimize(neg_eta, x0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": tol,
                            "fatol": 1e-14, "maxiter": 200})
    tau_star, _ = reduce_to_fundamental(complex(res.x[0], res.x[1]))
    # quadrature convergence spot-check at the maximizer: N vs 2N
    _, eta_N, _ = eta_at(tau_star, p, N)
    _, eta_2N, _ = eta_at(tau_star, p, 2 * N)
    spot = abs(eta_N - eta_2N) / abs(eta_2N)
    return {"tau_star": tau_star, "eta_star": float(-res.fun),
            "trace": trace, "warning": None,
            "grid_agreement": spot}
