"""Grid calculus on the oblique torus: flux-sector and periodic field operators.

Two discretizations coexist, by design:

* periodic fields (the photon deviation alpha, the Z field z, the Higgs
  deviation psi) are handled spectrally via the DFT on the index torus, which
  is exact on trigonometric polynomials;
* flux-sector fields (the W field w, quasiperiodic with Chern number n) admit
  no global Fourier basis, so covariant derivatives use central/one-sided
  differences with Peierls link phases exp(-i * integral of the potential
  along the edge).

The background a^n(x) = (n/2) J x contributes its link integral exactly
(midpoint rule is exact for linear potentials), and a periodic potential
contributes its *exact* line integral evaluated in Fourier space.  With that
choice a discrete gauge transformation w -> e^{i gamma} w,
alpha -> alpha + grad(gamma)/e telescopes exactly through every link, so the
discrete energy is gauge invariant to rounding, not just to O(N^-2).

Field arrays are indexed [..., j, k] with the last two axes the grid; vector
fields carry their two physical components in the leading axis, shape
(2, N, N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .lattice import Grid

TWO_PI = 2.0 * math.pi


class SectorError(ValueError):
    """Raised when fields from incompatible sectors or grids are combined."""


@dataclass
class GridField:
    """Samples of a scalar or 2-vector field tagged with its sector.

    sector = 0 means plain periodic; sector = n > 0 means the flux-n
    quasiperiodicity rule w(x+s) = exp(i((n/2) s x x + c_s)) w(x) with the
    standard cocycle c_{e1} = c_{e2} = 0.
    """

    values: np.ndarray
    sector: int
    grid: Grid

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 3

    def copy(self) -> "GridField":
        return GridField(self.values.copy(), self.sector, self.grid)

    def __add__(self, other: "GridField") -> "GridField":
        assert_compat(self, other)
        return GridField(self.values + other.values, self.sector, self.grid)

    def __sub__(self, other: "GridField") -> "GridField":
        assert_compat(self, other)
        return GridField(self.values - other.values, self.sector, self.grid)

    def __mul__(self, c) -> "GridField":
        return GridField(self.values * c, self.sector, self.grid)

    __rmul__ = __mul__


def assert_compat(f: GridField, g: GridField):
    if f.grid.N != g.grid.N or f.grid.shape.tau != g.grid.shape.tau:
        raise SectorError("fields live on different grids")
    if f.sector != g.sector:
        raise SectorError(f"sector mismatch: {f.sector} vs {g.sector}")


@dataclass
class FieldState:
    """Candidate vacuum configuration (w, alpha, z, psi) as deviations.

    The photon field is stored as the periodic deviation alpha from the
    analytic background a^n/e, and the Higgs field as psi = phi - xi.
    """

    w: np.ndarray      # (2, N, N) complex, flux-n sector
    alpha: np.ndarray  # (2, N, N) real, periodic
    z: np.ndarray      # (2, N, N) real, periodic
    psi: np.ndarray    # (N, N) real, periodic

    def copy(self) -> "FieldState":
        return FieldState(self.w.copy(), self.alpha.copy(), self.z.copy(), self.psi.copy())

    @classmethod
    def zero(cls, N: int) -> "FieldState":
        return cls(
            w=np.zeros((2, N, N), dtype=complex),
            alpha=np.zeros((2, N, N)),
            z=np.zeros((2, N, N)),
            psi=np.zeros((N, N)),
        )


class Calc:
    """Cached operator tables for one (grid, flux n) pair."""

    def __init__(self, grid: Grid, n: int):
        self.grid = grid
        self.n = int(n)
        N = grid.N
        self.N = N
        sh = grid.shape
        self.kap1 = sh.K1 / TWO_PI  # covariant derivative = kap1*d_1 + kap2*d_2
        self.kap2 = sh.K2 / TWO_PI
        self.h1 = sh.e1 / N
        self.h2 = sh.e2 / N
        # sector wrap factors for +1 shifts along each lattice axis
        idx = np.arange(N)
        self.wrap1 = np.exp(1j * self.n * np.pi * idx / N)   # row j = N-1, depends on k
        self.wrap2 = np.exp(-1j * self.n * np.pi * idx / N)  # col k = N-1, depends on j
        # background link phases theta_a(x) = (n/2) x cross h_a
        cross = lambda h: grid.x1 * h[1] - grid.x2 * h[0]
        self.bg_theta = (0.5 * self.n * cross(self.h1), 0.5 * self.n * cross(self.h2))
        # spectral tables
        m = np.rint(np.fft.fftfreq(N, d=1.0 / N)).astype(int)
        M1, M2 = np.meshgrid(m, m, indexing="ij")
        self.M1, self.M2 = M1, M2
        self.KX = M1 * sh.K1[0] + M2 * sh.K2[0]
        self.KY = M1 * sh.K1[1] + M2 * sh.K2[1]
        self.K2abs = self.KX**2 + self.KY**2
        # Spectral operators act on the dealiased trigonometric space: the
        # Nyquist rows are annihilated by every multiplier.  On an oblique
        # lattice the Nyquist wavevector is alias-ambiguous (the two aliases
        # have different |k|), so unmasked multipliers would not be
        # conjugate-symmetric and real fields would leak imaginary parts.
        nyq = N // 2
        self.dealias = (np.abs(M1) != nyq) & (np.abs(M2) != nyq)
        dealias = self.dealias
        self.DKX = np.where(dealias, 1j * self.KX, 0.0)
        self.DKY = np.where(dealias, 1j * self.KY, 0.0)
        # Nyquist-masked -|k|^2 so that -slap == sgrad* sgrad exactly
        self.LAPM = np.where(dealias, -self.K2abs, 0.0)
        # exact line-integral multipliers phi(2*pi*m_a/N), Nyquist zeroed so
        # the map stays real-to-real and exactly adjoint-consistent
        def phi(t):
            out = np.ones_like(t, dtype=complex)
            nz = t != 0
            out[nz] = (np.exp(1j * t[nz]) - 1.0) / (1j * t[nz])
            return out
        t1 = TWO_PI * M1 / N
        t2 = TWO_PI * M2 / N
        self.lint_phi = (
            np.where(np.abs(M1) != nyq, phi(t1), 0.0),
            np.where(np.abs(M2) != nyq, phi(t2), 0.0),
        )

    # ---------------- sector-wrapped shifts ----------------

    def translate(self, f: np.ndarray, axis: int, sign: int = +1) -> np.ndarray:
        """Wrapped shift by one node along lattice axis (0 or 1).

        sign=+1 returns f(x + h_a); sign=-1 returns f(x - h_a).  The wrapped
        line picks up the flux-sector automorphy factor.
        """
        ax = -2 + axis
        out = np.roll(f, -sign, axis=ax)
        if self.n != 0:
            if not np.iscomplexobj(out):
                out = out.astype(complex)
            if axis == 0:
                w = self.wrap1 if sign > 0 else self.wrap1.conj()
                row = -1 if sign > 0 else 0
                out[..., row, :] *= w
            else:
                w = self.wrap2 if sign > 0 else self.wrap2.conj()
                col = -1 if sign > 0 else 0
                out[..., :, col] *= w
        return out

    # ---------------- link phases ----------------

    def line_integral(self, v: np.ndarray, axis: int) -> np.ndarray:
        """Exact integral of the periodic vector field v along each (x, x+h_a) edge."""
        h = self.h1 if axis == 0 else self.h2
        vdh = np.fft.fft2(v[0] * h[0] + v[1] * h[1])
        return np.fft.ifft2(self.lint_phi[axis] * vdh).real

    def link_phases(self, nutilde: np.ndarray | None):
        """exp(-i Theta_a) with Theta_a = background + periodic line integral."""
        th1, th2 = self.bg_theta
        if nutilde is not None:
            th1 = th1 + self.line_integral(nutilde, 0)
            th2 = th2 + self.line_integral(nutilde, 1)
        return np.exp(-1j * th1), np.exp(-1j * th2)

    # ---------------- covariant differences ----------------

    def dplus(self, f: np.ndarray, axis: int, E) -> np.ndarray:
        return self.N * (E * self.translate(f, axis, +1) - f)

    def dminus(self, f: np.ndarray, axis: int, E) -> np.ndarray:
        return self.N * (f - self.translate(E.conj() * f, axis, -1))

    def dcentral(self, f: np.ndarray, axis: int, E) -> np.ndarray:
        return 0.5 * (self.dplus(f, axis, E) + self.dminus(f, axis, E))

    def cov_deriv(self, f: np.ndarray, links=None) -> np.ndarray:
        """Central covariant derivative (nabla_q f)_i, shape (2, ...)."""
        E1, E2 = links if links is not None else self.link_phases(None)
        d1 = self.dcentral(f, 0, E1)
        d2 = self.dcentral(f, 1, E2)
        return np.stack([self.kap1[0] * d1 + self.kap2[0] * d2,
                         self.kap1[1] * d1 + self.kap2[1] * d2])

    def dbar(self, f: np.ndarray, links=None) -> np.ndarray:
        """Annihilation operator (nabla)_1 + i (nabla)_2."""
        g = self.cov_deriv(f, links)
        return g[0] + 1j * g[1]

    def dbar_star(self, f: np.ndarray, links=None) -> np.ndarray:
        """Creation operator -((nabla)_1 - i (nabla)_2), the adjoint of dbar."""
        g = self.cov_deriv(f, links)
        return -(g[0] - 1j * g[1])

    # one-sided curl / grad / div and their exact adjoints

    def curl_pm(self, w: np.ndarray, sign: int, links) -> np.ndarray:
        E1, E2 = links
        d = self.dplus if sign > 0 else self.dminus
        s1 = self.kap1[0] * w[1] - self.kap1[1] * w[0]
        s2 = self.kap2[0] * w[1] - self.kap2[1] * w[0]
        return d(s1, 0, E1) + d(s2, 1, E2)

    def curl_adj_pm(self, s: np.ndarray, sign: int, links) -> np.ndarray:
        """Adjoint of curl_pm(. , -sign): built from the opposite difference."""
        E1, E2 = links
        d = self.dplus if sign > 0 else self.dminus
        d1 = d(s, 0, E1)
        d2 = d(s, 1, E2)
        return np.stack([self.kap1[1] * d1 + self.kap2[1] * d2,
                         -(self.kap1[0] * d1 + self.kap2[0] * d2)])

    def grad_pm(self, f: np.ndarray, sign: int, links) -> np.ndarray:
        E1, E2 = links
        d = self.dplus if sign > 0 else self.dminus
        d1 = d(f, 0, E1)
        d2 = d(f, 1, E2)
        return np.stack([self.kap1[0] * d1 + self.kap2[0] * d2,
                         self.kap1[1] * d1 + self.kap2[1] * d2])

    def div_pm(self, v: np.ndarray, sign: int, links) -> np.ndarray:
        E1, E2 = links
        d = self.dplus if sign > 0 else self.dminus
        s1 = self.kap1[0] * v[0] + self.kap1[1] * v[1]
        s2 = self.kap2[0] * v[0] + self.kap2[1] * v[1]
        return d(s1, 0, E1) + d(s2, 1, E2)

    # symmetric (second-order accurate, Hermitian) second-order operators

    def curlcurl_sym(self, w: np.ndarray, links=None) -> np.ndarray:
        links = links if links is not None else self.link_phases(None)
        out = self.curl_adj_pm(self.curl_pm(w, +1, links), -1, links)
        out = out + self.curl_adj_pm(self.curl_pm(w, -1, links), +1, links)
        return 0.5 * out

    def laplacian_sym(self, f: np.ndarray, links=None) -> np.ndarray:
        """-Delta_q f: positive, Hermitian, O(N^-2)."""
        links = links if links is not None else self.link_phases(None)
        out = -self.div_pm(self.grad_pm(f, +1, links), -1, links)
        out = out - self.div_pm(self.grad_pm(f, -1, links), +1, links)
        return 0.5 * out

    def graddiv_sym(self, w: np.ndarray, links=None) -> np.ndarray:
        """nabla_q div_q w: negative semidefinite, Hermitian, O(N^-2)."""
        links = links if links is not None else self.link_phases(None)
        out = self.grad_pm(self.div_pm(w, +1, links), -1, links)
        out = out + self.grad_pm(self.div_pm(w, -1, links), +1, links)
        return 0.5 * out

    # ---------------- spectral operators (periodic sector) ----------------

    def _mult(self, f: np.ndarray, m: np.ndarray) -> np.ndarray:
        out = np.fft.ifft2(m * np.fft.fft2(f))
        return out.real if np.isrealobj(f) else out

    def sgrad(self, f: np.ndarray) -> np.ndarray:
        return np.stack([self._mult(f, self.DKX), self._mult(f, self.DKY)])

    def scurl(self, v: np.ndarray) -> np.ndarray:
        return self._mult(v[1], self.DKX) - self._mult(v[0], self.DKY)

    def scurl_adj(self, s: np.ndarray) -> np.ndarray:
        """curl* s = -J grad s = (d2 s, -d1 s); exact adjoint of scurl."""
        return np.stack([self._mult(s, self.DKY), -self._mult(s, self.DKX)])

    def sdiv(self, v: np.ndarray) -> np.ndarray:
        return self._mult(v[0], self.DKX) + self._mult(v[1], self.DKY)

    def slap(self, f: np.ndarray) -> np.ndarray:
        """Spectral Laplacian, Nyquist-masked to equal -(sgrad)*(sgrad) exactly."""
        return self._mult(f, self.LAPM)

    def line_integral_adj(self, rho: np.ndarray, axis: int) -> np.ndarray:
        """Adjoint of line_integral w.r.t. the plain node sum; returns a vector field."""
        h = self.h1 if axis == 0 else self.h2
        s = np.fft.ifft2(np.conj(self.lint_phi[axis]) * np.fft.fft2(rho)).real
        return np.stack([h[0] * s, h[1] * s])

    def project_divfree(self, v: np.ndarray) -> np.ndarray:
        """Fourier projection onto divergence-free fields; k = 0 passes through."""
        vx = np.fft.fft2(v[0]) * self.dealias
        vy = np.fft.fft2(v[1]) * self.dealias
        k2 = self.K2abs.copy()
        k2[0, 0] = 1.0
        kdv = (self.KX * vx + self.KY * vy) / k2
        kdv[0, 0] = 0.0
        out = np.stack([np.fft.ifft2(vx - self.KX * kdv), np.fft.ifft2(vy - self.KY * kdv)])
        return out.real if np.isrealobj(v) else out

    def green(self, f: np.ndarray, msq: float) -> np.ndarray:
        """(-Delta + m^2)^{-1} f; for m = 0 the zero mode is annihilated."""
        if msq > 0:
            mult = self.dealias / (self.K2abs + msq)
        else:
            k2 = self.K2abs.copy()
            k2[0, 0] = 1.0
            mult = self.dealias / k2
            mult[0, 0] = 0.0
        return self._mult(f, mult)

    # ---------------- quadrature ----------------

    @cached_property
    def node_weight(self) -> float:
        return TWO_PI / self.N**2

    def integral(self, f: np.ndarray) -> complex | float:
        return self.node_weight * f.sum()

    def cell_avg(self, f: np.ndarray):
        return f.mean(axis=(-2, -1))

    def ip(self, f: np.ndarray, g: np.ndarray):
        """Raw-integral inner product <f, g> = int conj(f) g."""
        return self.node_weight * np.vdot(f, g)

    def norm(self, f: np.ndarray) -> float:
        return math.sqrt(abs(self.ip(f, f)))


_CALC_CACHE: dict = {}


def get_calc(grid: Grid, n: int) -> Calc:
    key = (complex(grid.shape.tau), grid.N, int(n))
    if key not in _CALC_CACHE:
        if len(_CALC_CACHE) > 64:
            _CALC_CACHE.clear()
        _CALC_CACHE[key] = Calc(grid, n)
    return _CALC_CACHE[key]


# ---------------- public GridField-level operations ----------------

def cov_grad(f: GridField, nutilde: np.ndarray | None = None) -> GridField:
    """Covariant gradient of a flux-sector scalar.

    The background a^n enters through exact link phases; an optional periodic
    potential deviation (a real (2,N,N) array) is folded into the links via
    its exact line integral.
    """
    if f.is_vector:
        raise SectorError("cov_grad expects a scalar field")
    calc = get_calc(f.grid, f.sector)
    if f.sector == 0 and nutilde is None:
        return GridField(calc.sgrad(f.values), 0, f.grid)
    links = calc.link_phases(nutilde)
    return GridField(calc.cov_deriv(f.values, links), f.sector, f.grid)


def curl2(v: GridField, nutilde: np.ndarray | None = None) -> GridField:
    """Covariant curl of a 2-vector field (central differences)."""
    if not v.is_vector:
        raise SectorError("curl2 expects a vector field")
    calc = get_calc(v.grid, v.sector)
    if v.sector == 0 and nutilde is None:
        return GridField(calc.scurl(v.values), 0, v.grid)
    links = calc.link_phases(nutilde)
    out = 0.5 * (calc.curl_pm(v.values, +1, links) + calc.curl_pm(v.values, -1, links))
    return GridField(out, v.sector, v.grid)


def curl2_adj(s: GridField, nutilde: np.ndarray | None = None) -> GridField:
    """Adjoint of curl2: curl* s = -J nabla s, discretely exact."""
    if s.is_vector:
        raise SectorError("curl2_adj expects a scalar field")
    calc = get_calc(s.grid, s.sector)
    if s.sector == 0 and nutilde is None:
        return GridField(calc.scurl_adj(s.values), 0, s.grid)
    links = calc.link_phases(nutilde)
    out = 0.5 * (calc.curl_adj_pm(s.values, +1, links) + calc.curl_adj_pm(s.values, -1, links))
    return GridField(out, s.sector, s.grid)


def average(f: GridField):
    """Cell average <f> = (1/|cell|) integral of f."""
    if f.sector != 0:
        raise SectorError("average is defined for periodic fields")
    return f.values.mean(axis=(-2, -1))


def project_divfree(v: GridField) -> GridField:
    if v.sector != 0 or not v.is_vector:
        raise SectorError("project_divfree expects a periodic vector field")
    calc = get_calc(v.grid, 0)
    return GridField(calc.project_divfree(v.values), 0, v.grid)


def hodge_split_flux(w: GridField):
    """Split a flux-n vector field as w = w0 + grad_{a^n} f with div w0 = 0.

    Uses the forward-difference gradient and its exact adjoint, so the
    divergence constraint holds to rounding in the discrete sense.
    """
    from scipy.sparse.linalg import cg, LinearOperator

    calc = get_calc(w.grid, w.sector)
    links = calc.link_phases(None)
    N = calc.N

    def gradp(fv):
        return calc.grad_pm(fv.reshape(N, N), +1, links)

    def divm(vv):
        return calc.div_pm(vv, -1, links)

    def amat(fv):
        return -divm(gradp(fv)).ravel()

    A = LinearOperator((N * N, N * N), matvec=amat, dtype=complex)
    rhs = -divm(w.values).ravel()
    f, info = cg(A, rhs, rtol=1e-12, atol=0.0, maxiter=4000)
    if info != 0:
        raise RuntimeError(f"hodge solve did not converge (info={info})")
    gf = gradp(f)
    w0 = GridField(w.values - gf, w.sector, w.grid)
    return w0, GridField(f.reshape(N, N), w.sector, w.grid), GridField(gf, w.sector, w.grid)


def gauge_transform(state: FieldState, gamma: np.ndarray, grid: Grid, e: float) -> FieldState:
    """Apply w -> e^{i gamma} w, alpha -> alpha + grad(gamma)/e (periodic gamma)."""
    calc = get_calc(grid, 0)
    return FieldState(
        w=np.exp(1j * gamma) * state.w,
        alpha=state.alpha + calc.sgrad(gamma) / e,
        z=state.z.copy(),
        psi=state.psi.copy(),
    )
