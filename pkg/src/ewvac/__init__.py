"""Vortex-lattice vacua of the electroweak model near the critical field.

Numerical machinery for the instability of the homogeneous vacuum in a
strong average magnetic field: theta-function lowest-Landau-level states,
link-phase covariant grid calculus, the linearized stability operators, the
bifurcating lattice branch, and the lattice-shape optimization that selects
the hexagonal cell.
"""

__version__ = "0.1.0"

from .params import PhysParams, from_masses, from_couplings, from_config, b_star_tesla
from .lattice import LatticeShape, Grid, make_grid, reduce_to_fundamental, shape_from_tau
from .fields import (GridField, FieldState, cov_grad, curl2, curl2_adj, average,
                     project_divfree, hodge_split_flux, gauge_transform, get_calc)
from .lll import (ThetaSeries, LLLState, theta_eval, build_chi, ladder_up,
                  annihilation_residual, vortex_winding, parity_defect, sector_extend)
from .green import GreenOp, apply as green_apply, apply_diff as green_apply_diff
from .spectrum import (SpectralReport, magnetic_laplacian_spectrum, h1_spectrum,
                       stability_verdict, h234_checks, torus_laplacian_spectrum)
from .energy import (EnergyBreakdown, energy, residual, gradient_check,
                     apply_linearization, pair_real, t_delta)
from .bifurcation import (FirstOrderFields, BranchPoint, first_order, alpha_eta,
                          s_squared_of_omega, energy_expansion, newton_branch,
                          current_divergence_weak)
from .shapeopt import ShapeScan, scan_eta, refine_max, eta_at, TAU_HEX
