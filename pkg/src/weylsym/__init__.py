"""Weyl-Titchmarsh functions and spectral classification for discrete symplectic systems.

The recursion ``z_k = (S_k + lam V_k) z_{k+1}`` on the half-line, with
``V_k = -J Psi_k S_k``, defines a self-adjoint problem once a boundary
matrix ``alpha`` is fixed.  This package computes its limiting
Weyl-Titchmarsh function ``M_+``, reads the spectrum off the boundary
behaviour of ``M_+`` on the real line, applies the resolvent through the
Green's kernel and checks everything against finite-section eigenvalues.
"""
__version__ = "0.1.0"

from .core import (  # noqa: E402
    Affine, BoundaryMatrix, Const, Periodic, SymplecticSystem, Table, J, check_atkinson, psi_v_convert,
    random_boundary, validate_system,
)
from .errors import *  # noqa: E402,F401,F403
from .propagate import (  # noqa: E402
    FundamentalSolution, WeightedSequence, fundamental, lagrange_defect, propagate_forward,
    propagate_inhomogeneous, seminorm, transfer, wronskian_residual,
)
from .weyl import (  # noqa: E402
    MPlusEvaluation, WeylFunction, decaying_basis, diagnose_limit_point, limit_m, regular_m, weyl_sequence,
    weyl_solution,
)
from .herglotz import HerglotzModel, StepSpectralFunction, herglotz_eval, semicircle_m  # noqa: E402
from .classify import (  # noqa: E402
    ClassificationRecord, ClassifyOptions, boundary_limit_L, classify_point, eigen_data, interlace_check,
    laurent_coeffs, scan_spectrum, tau_increment, transform_alpha,
)
from .resolvent import GreenKernel, green, resolve  # noqa: E402
from .models import (  # noqa: E402
    JacobiModel, builtin, direct_sum, free_jacobi, jacobi_to_symplectic, one_jump_synthetic, oscillator,
    random_system,
)
from .oracle import det_root_scan, jacobi_truncation_eigs  # noqa: E402
