"""Physical couplings of the electroweak vacuum problem and derived constants.

All internal arithmetic uses the convention phi0 = 1, with the SU(2) coupling
fixed by g = sqrt(2) * M_W / phi0.  Every observable produced by the rest of
the package depends only on the mass ratios M_Z/M_W, M_H/M_W and the flux
integer n, so the normalization is a pure bookkeeping choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class ParamError(ValueError):
    """Raised for mass orderings or couplings that violate the model."""


@dataclass(frozen=True)
class PhysParams:
    """Couplings, Weinberg angle, masses and their rescaled counterparts.

    Immutable after construction; safe to share across workers.
    """

    g: float
    gprime: float
    lam: float
    phi0: float
    n: int
    # derived, filled in __post_init__
    theta: float = field(init=False)
    e: float = field(init=False)
    M_W: float = field(init=False)
    M_Z: float = field(init=False)
    M_H: float = field(init=False)
    b_star: float = field(init=False)
    m_w: float = field(init=False)
    m_z: float = field(init=False)
    m_h: float = field(init=False)
    kappa: float = field(init=False)

    def __post_init__(self):
        if self.g <= 0 or self.gprime <= 0 or self.lam <= 0 or self.phi0 <= 0:
            raise ParamError("couplings g, g', lambda and phi0 must be positive")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ParamError("flux integer n must be a positive integer")
        theta = math.atan2(self.gprime, self.g)
        sin_t, cos_t = math.sin(theta), math.cos(theta)
        obj = lambda name, val: object.__setattr__(self, name, val)
        obj("theta", theta)
        obj("e", self.g * sin_t)
        obj("M_W", self.g * self.phi0 / math.sqrt(2.0))
        obj("M_Z", self.g * self.phi0 / (math.sqrt(2.0) * cos_t))
        # M_H = sqrt(2*lambda)*phi0; the only convention compatible with the
        # rescaled Higgs mass m_h = sqrt(4*lambda*n)/g.
        obj("M_H", math.sqrt(2.0 * self.lam) * self.phi0)
        obj("b_star", self.M_W**2 / self.e)
        n = self.n
        obj("m_w", math.sqrt(n))
        obj("m_z", math.sqrt(n) / cos_t)
        obj("m_h", math.sqrt(4.0 * self.lam * n) / self.g)
        obj("kappa", self.g**2 / (2.0 * cos_t**2))

    @property
    def sin2_theta(self) -> float:
        return math.sin(self.theta) ** 2

    def mu_of_b(self, b: float) -> float:
        """Eigenvalue parameter mu = g^2 xi^2 / 2 = n * b_star / b."""
        if b <= 0:
            raise ParamError("magnetic field strength b must be positive")
        return self.n * self.b_star / b

    def xi_of_b(self, b: float) -> float:
        """Rescaled Higgs vacuum value xi = sqrt(n/(e*b)) * phi0."""
        if b <= 0:
            raise ParamError("magnetic field strength b must be positive")
        return math.sqrt(self.n / (self.e * b)) * self.phi0

    def b_of_omega(self, omega: float) -> float:
        """Field strength with relative distance omega = 1 - b_star/b above threshold."""
        if omega >= 1.0:
            raise ParamError("omega must be < 1")
        return self.b_star / (1.0 - omega)

    def as_dict(self) -> dict:
        return {
            "g": self.g, "gprime": self.gprime, "lambda": self.lam,
            "phi0": self.phi0, "n": self.n,
            "theta": self.theta, "e": self.e,
            "M_W": self.M_W, "M_Z": self.M_Z, "M_H": self.M_H,
            "b_star": self.b_star,
            "m_w": self.m_w, "m_z": self.m_z, "m_h": self.m_h,
        }


def from_masses(M_W: float, M_Z: float, M_H: float, n: int = 1) -> PhysParams:
    """Build parameters from the W, Z and Higgs masses.

    The Weinberg angle is fixed by cos(theta) = M_W/M_Z, the internal unit by
    phi0 = 1 with g = sqrt(2)*M_W/phi0, and lambda by the ratio M_H/M_W.
    Requires 0 < M_W < M_Z < M_H.
    """
    if not (0 < M_W < M_Z):
        raise ParamError(f"need 0 < M_W < M_Z, got M_W={M_W}, M_Z={M_Z}")
    if not (M_Z < M_H):
        raise ParamError(f"need M_Z < M_H, got M_Z={M_Z}, M_H={M_H}")
    phi0 = 1.0
    g = math.sqrt(2.0) * M_W / phi0
    cos_t = M_W / M_Z
    sin_t = math.sqrt(1.0 - cos_t**2)
    gprime = g * sin_t / cos_t
    lam = 0.5 * (M_H / phi0) ** 2
    return PhysParams(g=g, gprime=gprime, lam=lam, phi0=phi0, n=int(n))


def from_couplings(g: float, gprime: float, lam: float, phi0: float, n: int = 1) -> PhysParams:
    """Build parameters directly from (g, g', lambda, phi0)."""
    return PhysParams(g=g, gprime=gprime, lam=lam, phi0=phi0, n=int(n))


def from_config(block: dict) -> PhysParams:
    """Build parameters from a JSON config block (mass form or coupling form)."""
    if "M_W" in block:
        return from_masses(block["M_W"], block["M_Z"], block["M_H"], int(block.get("n", 1)))
    keys = ("g", "gprime", "lambda", "phi0")
    if all(k in block for k in keys):
        return from_couplings(block["g"], block["gprime"], block["lambda"],
                              block["phi0"], int(block.get("n", 1)))
    raise ParamError("params block needs either {M_W,M_Z,M_H[,n]} or {g,gprime,lambda,phi0[,n]}")


def b_star_tesla(M_W_GeV: float) -> float:
    """Critical field M_W^2/e in Tesla, for display only.

    Both b* = M_W^2/e and the Schwinger field B_S = m_e^2/e carry the same
    electromagnetic charge, so b*/B_S = (M_W/m_e)^2 and the coupling cancels.
    Yields ~1.1e20 T for the physical W mass.
    """
    m_e_gev = 0.51099895e-3
    schwinger_tesla = 4.41e9
    return (M_W_GeV / m_e_gev) ** 2 * schwinger_tesla
