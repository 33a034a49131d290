"""Sampling estimators for Hölder [q]-regularity constants of collections of sets."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    BasePointError, HalfSpace, Intersection, NoAnalyticOracleError, PolyGraph, PolySublevel,
    SetCollection, SpaceConfig, Translate, Union, UnresolvedIntersectionDistance, WholeSpace,
    distance, intersection_distance, nearest_points, project, weighted_product_norm,
)
from .moduli import (  # noqa: E402
    CheckReport, ModulusEstimate, RadiusEstimate, RadiusSchedule, check_metric_inequality,
    critical_exponent, modulus, slope_modulus, sub_quotient, theta_rho, zeta_rho_delta,
)
from .dual import (  # noqa: E402
    DualCriterionReport, NormalCone, NormalVector, dual_modulus, duality_map_check,
    duality_map_sample, frechet_normal_cone, proximal_normals,
)
from .mappings import (  # noqa: E402
    MapModulusEstimate, SetValuedMap, bridge_check, collection_to_map, map_modulus,
    map_to_collection,
)
from .presets import SpecError, load_spec, parse_spec, preset  # noqa: E402
