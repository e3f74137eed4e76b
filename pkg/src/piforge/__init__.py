"""Connectivity, Poincaré and thickening tools for finite metric measure spaces."""
from .space import (TOL, Ball, FiniteMetricMeasureSpace, SpaceError, ball, ball_mass,
                    doubling_constant, doubling_profile, lip_field, lipschitz_constant,
                    maximal_function)
from .fragments import CurveFragment, Leg, ParetoFront, pareto_fragments
from .connectivity import (CERTIFIED, REFUTED, UNKNOWN, ConnectivityParams,
                           ConnectivityVerdict, estimate_fine_alpha, predicted_constants,
                           quasiconvexify, verify_pair, worst_obstacle)
from .poincare import check_ainfty, modulus, pi_scan
from .thickening import certify_thickened, thicken, verify_estimates
from .corpus import generate
from .spaceio import load_space, save_space

__version__ = "0.1.0"

__all__ = [
    "TOL", "Ball", "FiniteMetricMeasureSpace", "SpaceError", "ball", "ball_mass",
    "doubling_constant", "doubling_profile", "lip_field", "lipschitz_constant",
    "maximal_function", "CurveFragment", "Leg", "ParetoFront", "pareto_fragments",
    "CERTIFIED", "REFUTED", "UNKNOWN", "ConnectivityParams", "ConnectivityVerdict",
    "estimate_fine_alpha", "predicted_constants", "quasiconvexify", "verify_pair",
    "worst_obstacle", "check_ainfty", "modulus", "pi_scan", "certify_thickened", "thicken",
    "verify_estimates", "generate", "load_space", "save_space",
]
