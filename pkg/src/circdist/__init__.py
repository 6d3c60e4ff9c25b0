"""Distortion, conjugation and rotation-number tools for circle diffeomorphisms."""

from .errors import (
    BreakpointQueryError, CommutativityError, ConstructionError, NumericFailure, ResourceLimitError,
    UncertifiedHorizonWarning, UnsupportedVariantError,
)
from .maps import (
    GOLDEN, CircleMap, Compose, FourierDiffeo, Identity, IntervalMap, Inverse, Map1D, Rotation,
    affine_deriv, circle_distance, compose, conjugate, deriv, evaluate, orbit, rotation_number,
    tune_rotation_number, wrap,
)
from .sampled import SampledDiffeo
from .series import DistortionSeries
from .pa import (
    PAMap, balanced_map, balance_predicate, pa_class_sum, pa_complete_jump, pa_compose, pa_inverse,
    pa_iterate, pa_jump, pa_var_sequence, two_interval_map,
)
from .mobius import (
    MobiusMap, classify, hyperbolic_distance, mobius_asymptotic_distortion, var_log_deriv_closed,
    var_log_deriv_power,
)
from .interval import BumpDiffeo, ParabolicRestriction, SmoothPatch
from .cantor import CantorMap, cantor_function
from .distortion import (
    Schedule, asymptotic_distortion, limit_estimate, cantor_lower_bound, rotation_proximity,
    stability_check, total_variation_log_deriv, var_log_deriv_iterate,
)
from .conjugation import (
    birkhoff_psi, box_conjugator, parabolic_patch_build, orbit_mean_conjugator, conjugacy_defect, cantor_map_build,
    mean_conjugator, box_affine_decay, path_conjugator,
)

__version__ = "0.1.0"
