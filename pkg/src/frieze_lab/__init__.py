"""Continuous 2-friezes from projective curves: construction, reduction, lattices and symplectic forms."""

from .curves import (
    ConicCurve,
    ConvexityError,
    CurveError,
    CurveSpecError,
    FourierCurve,
    FourierSeries,
    PowerCurve,
    lift_frame,
    parse_curve_spec,
)
from .frieze2 import TwoFrieze, companion_G, eval_F, eval_G, verify_closed
from .jetcore import Jet, Vec3Jet
from .projective import conic_test, length_density, operator_coeffs
from .reduction import hill_solve, q_from_frieze, recover_lift, reduce_frieze
from .symplectic import DeformationFamily, cluster_form_discrete, limit_check, omega_continuous

__version__ = "0.1.0"
