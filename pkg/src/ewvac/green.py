"""Periodic resolvents G_m = (-Delta + m^2)^{-1} as Fourier multipliers.

The difference operator used by the lattice shape function is
G_diff(m_z, m_h) = G_{m_z} - G_{m_h}, which is positivity preserving for
m_z < m_h (the multiplier 1/(|k|^2 + m^2) decreases in m).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import GridField, get_calc
from .lattice import Grid


class GreenError(ValueError):
    pass


@dataclass(frozen=True)
class GreenOp:
    """Resolvent (-Delta + m^2)^{-1} on periodic scalars; m = 0 needs mean-zero input."""

    m: float
    grid: Grid

    def __post_init__(self):
        if self.m < 0:
            raise GreenError("mass must be non-negative")

    @property
    def multipliers(self) -> np.ndarray:
        calc = get_calc(self.grid, 0)
        if self.m > 0:
            return calc.dealias / (calc.K2abs + self.m**2)
        k2 = calc.K2abs.copy()
        k2[0, 0] = 1.0
        mult = calc.dealias / k2
        mult[0, 0] = 0.0
        return mult


def apply(G: GreenOp, f: GridField) -> GridField:
    """Apply the resolvent; raises if m = 0 and the input has a mean."""
    if f.sector != 0 or f.is_vector:
        raise GreenError("Green operators act on periodic scalar fields")
    calc = get_calc(f.grid, 0)
    if G.m == 0.0:
        mean = abs(complex(np.mean(f.values)))
        scale = max(float(np.abs(f.values).max()), 1.0)
        if mean > 1e-10 * scale:
            raise GreenError(f"G_0 needs mean-zero input, got mean {mean:.3e}")
    out = calc._mult(f.values, G.multipliers)
    return GridField(out, 0, f.grid)


def apply_diff(m1: float, m2: float, f: GridField) -> GridField:
    """(G_{m1} - G_{m2}) f; positivity preserving for m1 < m2."""
    if m1 <= 0 or m2 <= 0:
        raise GreenError("apply_diff needs strictly positive masses")
    if f.sector != 0 or f.is_vector:
        raise GreenError("Green operators act on periodic scalar fields")
    calc = get_calc(f.grid, 0)
    mult = calc.dealias * (1.0 / (calc.K2abs + m1**2) - 1.0 / (calc.K2abs + m2**2))
    return GridField(calc._mult(f.values, mult), 0, f.grid)
