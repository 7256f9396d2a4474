"""Computational toolkit for the sub-Riemannian geometry of Sol / E(1,1).

The group of rigid motions of the Minkowski plane, modeled on R^3 with a
left-invariant orthonormal frame {X, Y, T}, carries a natural sub-Riemannian
structure.  This package evaluates the minimal-surface equation on level
sets, integrates characteristic curves in closed form, builds ruled
area-stationary surfaces from horizontal singular curves, and evaluates the
second-variation (stability) quadratic form by quadrature.
"""

__version__ = "0.1.0"

from .frame import (
    CoordVector,
    FrameVector,
    Point,
    connection,
    frame_at,
    j_rotate,
    lie_bracket,
    to_coord,
    to_frame,
    torsion,
    webster_curvature,
)
from .expressions import ScalarField, catalog, parse
from .surface import (
    SurfacePointData,
    mean_curvature,
    minimal_residual,
    necessary_stability_quantity,
    point_data,
    surface_torsion_terms,
)
from .curves import CharacteristicCurve, eval_curve, integrate_ode, is_geodesic, make_curve
from .stationary import (
    HorizontalCurve,
    RuledSurface,
    family_surfaces,
    jacobi_vertical,
    orthogonality_check,
    singular_point_surface,
    sweep_surface,
    uniqueness_scan,
)
from .stability import (
    QuadratureReport,
    TestFunction,
    area_compare,
    jacobi_profile,
    q_form,
    q_form_simplified,
    sufficient_condition,
)

__all__ = [
    "CharacteristicCurve",
    "CoordVector",
    "FrameVector",
    "HorizontalCurve",
    "Point",
    "QuadratureReport",
    "RuledSurface",
    "ScalarField",
    "SurfacePointData",
    "TestFunction",
    "area_compare",
    "catalog",
    "connection",
    "eval_curve",
    "family_surfaces",
    "frame_at",
    "integrate_ode",
    "is_geodesic",
    "j_rotate",
    "jacobi_profile",
    "jacobi_vertical",
    "lie_bracket",
    "make_curve",
    "mean_curvature",
    "minimal_residual",
    "necessary_stability_quantity",
    "orthogonality_check",
    "parse",
    "point_data",
    "q_form",
    "q_form_simplified",
    "singular_point_surface",
    "sufficient_condition",
    "surface_torsion_terms",
    "sweep_surface",
    "to_coord",
    "to_frame",
    "torsion",
    "uniqueness_scan",
    "webster_curvature",
]
