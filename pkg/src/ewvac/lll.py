"""Lowest-Landau-level states from Jacobi theta series.

The flux-n kernel of -Delta_{a^n} - n in the symmetric gauge a^n = (n/2) J x
consists of functions

    beta(x) = exp((n/2) (i x1 x2 - x2^2)) * theta(z),
    z = (x1 + i x2) / sqrt(2*pi / Im tau),

where theta(z) = sum_m c_m e^{2 pi i m z} with the coefficient recursion
c_{m+n} = e^{i pi n tau} e^{2 pi i m tau} c_m, leaving the n seeds
c_0..c_{n-1} free.  A state of this form satisfies the quasiperiodicity rule
w(x+s) = exp(i (n/2) s x x) w(x) with trivial cocycle constants on the basis
vectors, which is exactly the sector convention of the grid machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import Grid, LatticeShape, make_grid
from .fields import GridField, get_calc


class ThetaError(ValueError):
    pass


def default_truncation(tau: complex, n: int = 1) -> int:
    """Series cutoff with tail below 1e-14 for Im tau >= 0.5."""
    return math.ceil(math.sqrt(34.0 / (math.pi * tau.imag))) + 2


@dataclass
class ThetaSeries:
    """Truncated theta series for flux n with seed coefficients c_0..c_{n-1}."""

    tau: complex
    n: int = 1
    coeffs: np.ndarray | None = None
    truncation: int | None = None
    tail_bound: float = field(init=False)

    def __post_init__(self):
        self.tau = complex(self.tau)
        if self.tau.imag <= 0:
            raise ThetaError(f"Im tau must be positive, got {self.tau}")
        if self.coeffs is None:
            self.coeffs = np.zeros(self.n, dtype=complex)
            self.coeffs[0] = 1.0
        else:
            self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if len(self.coeffs) != self.n:
            raise ThetaError(f"need exactly n={self.n} seed coefficients, got {len(self.coeffs)}")
        if self.truncation is None:
            self.truncation = default_truncation(self.tau, self.n)
        M = self.truncation
        # crude Gaussian tail estimate sum_{|m| > M} e^{-pi Im tau n (m-1)^2}
        t = math.pi * self.tau.imag * self.n
        self.tail_bound = 2.0 * math.exp(-t * max(M - 1, 1) ** 2) / max(1.0 - math.exp(-t), 1e-3)

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        """theta(z) = sum_{r, k} c_r exp(i pi tau (n k^2 + 2 k r)) e^{2 pi i (r + k n) z}."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        tau, n, M = self.tau, self.n, self.truncation
        for r in range(n):
            if self.coeffs[r] == 0:
                continue
            for k in range(-M, M + 1):
                c = self.coeffs[r] * np.exp(1j * math.pi * tau * (n * k * k + 2 * k * r))
                out = out + c * np.exp(2j * math.pi * (r + k * n) * z)
        return out


def theta_eval(series: ThetaSeries, z) -> np.ndarray | complex:
    """Evaluate a truncated theta series; scalar in, scalar out."""
    arr = series.evaluate(np.asarray(z, dtype=complex))
    return complex(arr) if np.ndim(z) == 0 else arr


@dataclass
class LLLState:
    """Normalized null state chi = (beta, i beta) with <|chi|^2> = 1."""

    beta: GridField
    chi: GridField
    shape: LatticeShape
    n: int
    series: ThetaSeries

    @property
    def density(self) -> np.ndarray:
        """|chi|^2 = 2 |beta|^2, a periodic real field with unit cell average."""
        return 2.0 * np.abs(self.beta.values) ** 2


def build_chi(shape: LatticeShape, n: int = 1, grid: Grid | None = None,
              N: int = 64, coeffs=None, truncation: int | None = None) -> LLLState:
    """Sample the theta-function null state on the grid and normalize it.

    For n = 1 the default seed c_0 = 1 gives the even state beta(-x) = beta(x)
    whose single zero sits at the cell center (e1 + e2)/2.
    """
    if grid is None:
        grid = make_grid(shape, N)
    series = ThetaSeries(tau=shape.tau, n=n, coeffs=coeffs, truncation=truncation)
    z = grid.z
    prefactor = np.exp(0.5 * n * (1j * grid.x1 * grid.x2 - grid.x2**2))
    beta = prefactor * series.evaluate(z)
    # normalize so that <|chi|^2> = 2 <|beta|^2> = 1
    nrm = math.sqrt(2.0 * float(np.mean(np.abs(beta) ** 2)))
    beta = beta / nrm
    chi = np.stack([beta, 1j * beta])
    return LLLState(
        beta=GridField(beta, n, grid),
        chi=GridField(chi, n, grid),
        shape=shape, n=n, series=series,
    )


def ladder_up(state: GridField, k: int = 1) -> GridField:
    """Apply the normalized creation operator (dbar*)^k to a flux-n scalar.

    Maps Landau level l to level l+k up to O(N^-2); the result is normalized.
    Raises on norm collapse (degenerate input).
    """
    if state.is_vector:
        raise ValueError("ladder_up expects a scalar flux-sector field")
    calc = get_calc(state.grid, state.sector)
    v = state.values
    for _ in range(k):
        v = calc.dbar_star(v)
        nrm = calc.norm(v)
        if nrm < 1e-10:
            raise ValueError("ladder_up: norm collapse, input is not in a Landau level")
        v = v / nrm
    return GridField(v, state.sector, state.grid)


def annihilation_residual(state: LLLState) -> float:
    """Relative norm of dbar_{a^n} beta; tends to 0 as O(N^-2) under refinement."""
    calc = get_calc(state.beta.grid, state.n)
    r = calc.dbar(state.beta.values)
    return calc.norm(r) / calc.norm(state.beta.values)


def sector_extend(values: np.ndarray, n: int, grid: Grid,
                  J: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Value of a flux-n scalar at arbitrary integer node indices (J, K).

    Indices outside [0, N) are folded back with the quasiperiodicity rule
    w(x + s) = exp(i((n/2) s x x + c_s)) w(x), using the standard cocycle
    c_{m1 e1 + m2 e2} = pi n m1 m2 (mod 2 pi).
    """
    N = grid.N
    J = np.asarray(J); K = np.asarray(K)
    mj, j0 = np.divmod(J, N)
    mk, k0 = np.divmod(K, N)
    e1, e2 = grid.shape.e1, grid.shape.e2
    x1 = grid.x1[j0, k0]
    x2 = grid.x2[j0, k0]
    s1 = mj * e1[0] + mk * e2[0]
    s2 = mj * e1[1] + mk * e2[1]
    phase = 0.5 * n * (s1 * x2 - s2 * x1) + math.pi * n * mj * mk
    return np.exp(1j * phase) * values[j0, k0]


def parity_defect(state: LLLState) -> float:
    """max |beta(-x) - beta(x)| over grid nodes, sector transport included."""
    grid = state.beta.grid
    N = grid.N
    J, K = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    mirrored = sector_extend(state.beta.values, state.n, grid, -J, -K)
    return float(np.abs(mirrored - state.beta.values).max())


def vortex_winding(beta: GridField) -> int:
    """Total phase winding of beta around the cell, vortex count per cell.

    Sums the branch-cut-free phase differences along every plaquette of the
    index torus; for a flux-n state the count is n.
    """
    calc = get_calc(beta.grid, beta.sector)
    v = beta.values
    ang = lambda f, g: np.angle(g / np.where(f == 0, 1, f))
    t1 = calc.translate(v, 0, +1)
    t2 = calc.translate(v, 1, +1)
    t12 = calc.translate(t1, 1, +1)
    w = ang(v, t1) + ang(t1, t12) + ang(t12, t2) + ang(t2, v)
    total = w.sum() / (2.0 * math.pi)
    return int(round(float(total)))
