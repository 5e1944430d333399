"""Centro-affine differential invariants of planar curves, the invariant
heat flow, and signature-based contour matching."""

from . import canonical, contour_io, curve_core, flows, matching, preprocess
from .curve_core import (
    ConstantCurvatureClass,
    CurveJet,
    Derivatives3,
    InvariantSignature,
    MovingFrame,
    SampledCurve,
    bracket,
    classify_constant,
    curvature_graph,
    invariants_at,
    moving_frame,
    reconstruct_from_curvature,
    signature,
)
from .flows import (
    BetaSpec,
    FlowState,
    burgers_characteristics,
    exact_heat_solution,
    heat_flow_evolve,
)
from .matching import (
    AlignmentResult,
    Homography,
    apply_homography,
    best_alignment,
    correlation,
    dtw_align,
    estimate_homography,
    match_contours,
    signal_distance,
)
from .preprocess import (
    BSplineCurve,
    center_at_barycenter,
    condition_contour,
    fit_bspline_closed,
    gaussian_smooth,
    kmeans_resample,
)

__version__ = "0.1.0"
