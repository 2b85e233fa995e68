"""Normalized lattices Z + tau*Z scaled to cell area 2*pi, and sampling grids.

The lattice basis is e1 = c*(1, 0), e2 = c*(Re tau, Im tau) with
c = sqrt(2*pi / Im tau), so |e1 x e2| = 2*pi exactly.  Grids are uniform in
lattice coordinates t_i = j/N, which makes periodicity exact on the index
torus and gives each node the trapezoid weight 2*pi/N^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class LatticeError(ValueError):
    pass


CELL_AREA = 2.0 * math.pi


def reduce_to_fundamental(tau: complex, tol: float = 1e-12):
    """Reduce tau to the SL(2,Z) fundamental domain |tau|>=1, -1/2 < Re tau <= 1/2.

    Returns (tau_reduced, M) with M an integer matrix of determinant 1 acting
    by the Moebius map tau -> (a*tau + b)/(c*tau + d).  Boundary ties: points
    with |tau| = 1 and Re tau < 0 are mapped to their Re tau > 0 mirror, and
    Re tau = -1/2 maps to +1/2.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise LatticeError(f"Im tau must be positive, got {tau}")
    a, b, c, d = 1, 0, 0, 1  # accumulated matrix, tau_cur = (a tau0 + b)/(c tau0 + d)
    for _ in range(10_000):
        k = round(tau.real)
        if k != 0:  # tau -> tau - k, matrix T^{-k} M
            tau = tau - k
            a, b = a - k * c, b - k * d
        if abs(tau) < 1.0 - tol:  # tau -> -1/tau, matrix S M
            tau = -1.0 / tau
            a, b, c, d = -c, -d, a, b
            continue
        # in the closure of the domain: resolve boundary ties
        if tau.real <= -0.5 + tol:
            tau = tau + 1.0
            a, b = a + c, b + d
        if abs(abs(tau) - 1.0) <= tol and tau.real < -tol:
            tau = -1.0 / tau
            a, b, c, d = -c, -d, a, b
        break
    else:  # pragma: no cover
        raise LatticeError("reduction did not terminate")
    return tau, np.array([[a, b], [c, d]], dtype=int)


def moebius(M: np.ndarray, tau: complex) -> complex:
    a, b, c, d = int(M[0, 0]), int(M[0, 1]), int(M[1, 0]), int(M[1, 1])
    return (a * tau + b) / (c * tau + d)


@dataclass(frozen=True)
class LatticeShape:
    """Shape parameter tau with basis/dual-basis data for the area-2*pi cell."""

    tau: complex
    e1: np.ndarray = field(init=False, repr=False)
    e2: np.ndarray = field(init=False, repr=False)
    K1: np.ndarray = field(init=False, repr=False)
    K2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tau = complex(self.tau)
        if tau.imag <= 0:
            raise LatticeError(f"Im tau must be positive, got {tau}")
        c = math.sqrt(CELL_AREA / tau.imag)
        e1 = np.array([c, 0.0])
        e2 = np.array([c * tau.real, c * tau.imag])
        # dual basis with K_i . e_j = 2*pi*delta_ij
        E = np.column_stack([e1, e2])
        K = CELL_AREA * np.linalg.inv(E).T
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)
        object.__setattr__(self, "K1", K[:, 0].copy())
        object.__setattr__(self, "K2", K[:, 1].copy())

    @property
    def cell_area(self) -> float:
        return CELL_AREA

    @property
    def scale(self) -> float:
        """Modulus of e1 viewed as the complex number c."""
        return float(self.e1[0])

    def as_dict(self) -> dict:
        return {"tau": [self.tau.real, self.tau.imag]}


@dataclass(frozen=True)
class Grid:
    """N x N sampling of the fundamental cell, uniform in lattice coordinates.

    Node (j, k) sits at x = (j/N) e1 + (k/N) e2; arrays are indexed [j, k]
    (row-major in (t1, t2)).
    """

    shape: LatticeShape
    N: int
    x1: np.ndarray = field(init=False, repr=False)
    x2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        N = self.N
        if N < 8 or N % 2 != 0:
            raise LatticeError(f"grid size N must be even and >= 8, got {N}")
        t = np.arange(N) / N
        T1, T2 = np.meshgrid(t, t, indexing="ij")
        e1, e2 = self.shape.e1, self.shape.e2
        object.__setattr__(self, "x1", T1 * e1[0] + T2 * e2[0])
        object.__setattr__(self, "x2", T1 * e1[1] + T2 * e2[1])

    @property
    def node_weight(self) -> float:
        return CELL_AREA / self.N**2

    @property
    def z(self) -> np.ndarray:
        """Complex coordinate z = (x1 + i x2)/c mapping the cell to Z + tau Z."""
        return (self.x1 + 1j * self.x2) / self.shape.scale


def make_grid(shape: LatticeShape, N: int) -> Grid:
    return Grid(shape=shape, N=N)


def shape_from_tau(tau: complex) -> LatticeShape:
    return LatticeShape(tau=complex(tau))
