"""The lowest-Landau-level null state from Jacobi theta series.

beta(x) = exp((n/2)(i x1 x2 - x2^2)) theta(z) spans the kernel of
-Delta_{a^n} - n; the normalized chi = (beta, i beta) is the seed of the
bifurcating vortex lattice.  The script verifies the quasiperiodicity and
parity of the state, counts its vortex (one zero per cell, at the cell
center), and evaluates the Abrikosov ratio beta(tau) = <|chi|^4>/<|chi|^2>^2
for the square and hexagonal lattices: 1.18034 vs 1.15960 -- the hexagonal
lattice packs the vortex density more evenly.
"""

import numpy as np

from ewvac import (LatticeShape, annihilation_residual, build_chi, ladder_up,
                   make_grid, parity_defect, vortex_winding)

TAU_HEX = complex(0.5, np.sqrt(3.0) / 2.0)

for tau, name in [(1j, "square"), (TAU_HEX, "hexagonal")]:
    shape = LatticeShape(tau=tau)
    print(f"=== {name} lattice (tau = {tau:.4g}) ===")
    for N in (32, 64, 128):
        st = build_chi(shape, 1, N=N)
        beta_ratio = float(np.mean(st.density**2))
        print(f"  N={N:4d}: <|chi|^4> = {beta_ratio:.7f}   "
              f"|dbar beta|/|beta| = {annihilation_residual(st):.2e}")
    st = build_chi(shape, 1, N=64)
    print(f"  parity defect |beta(-x) - beta(x)|: {parity_defect(st):.2e}")
    print(f"  vortices per cell (winding): {vortex_winding(st.beta)}")
    j, k = np.unravel_index(np.argmin(np.abs(st.beta.values)), (64, 64))
    print(f"  zero located at lattice coordinates ({j/64:.3f}, {k/64:.3f}) "
          "(cell center = (0.5, 0.5))")
    print()

print("=== climbing the Landau ladder with the creation operator ===")
shape = LatticeShape(tau=TAU_HEX)
grid = make_grid(shape, 48)
st = build_chi(shape, 1, grid=grid)
from ewvac.fields import get_calc
calc = get_calc(grid, 1)
links = calc.link_phases(None)
for k in (0, 1, 2):
    f = st.beta if k == 0 else ladder_up(st.beta, k)
    rq = float((calc.ip(f.values, calc.laplacian_sym(f.values, links))
                / calc.ip(f.values, f.values)).real)
    print(f"  (dbar*)^{k} beta: Rayleigh quotient of -Delta = {rq:.4f} "
          f"(Landau value {2*k + 1})")
