"""Strong-coupling spectra of singular interactions supported by space curves."""
from .errors import ConfigError, GeometryError, LeakyWireError, RegimeError, SolverError
from .special import bessel_quad
from .geometry import (builtin_curve, check_tube_embedding, constant_profile, curvature_profile,
                       profile_from_function, reparametrize_arclength)
from .transverse import coupling_state, envelope, fit_envelope, solve_dirichlet_root, solve_robin_root
from .comparison import build_operator, eigenvalues, floquet_spectrum, infinite_curve_spectrum, spectrum
from .bracketing import estimate_constants, squeeze_check
from .asymptotics import counting_function, eigenvalue_asymptotics, gap_widths, semiclassical_view

__version__ = "0.1.0"
