"""Align the Laplace-Beltrami eigenspaces of two near-isometric shapes.

The heavy lifting lives in the compiled extension; this package re-exports
its public names.
"""

from ._core import (
    Candidate,
    CostBreakdown,
    DescriptorField,
    EigenmatchError,
    MatchParams,
    MatchResult,
    MomentSet,
    PointMatch,
    SignatureField,
    SpectralBasis,
    TriMesh,
    __version__,
    apply_match,
    compute_basis,
    compute_moment_set,
    cotan_matrix,
    descriptor_field,
    diffusion_distance,
    diffusion_map,
    export_colored_ply,
    face_areas,
    face_gradient,
    face_normals,
    farthest_point_sample,
    hks,
    hks_derivative_signature,
    load_mesh,
    match_moment_sets,
    match_points,
    total_cost,
    vertex_areas,
)

__all__ = [
    "Candidate",
    "CostBreakdown",
    "DescriptorField",
    "EigenmatchError",
    "MatchParams",
    "MatchResult",
    "MomentSet",
    "PointMatch",
    "SignatureField",
    "SpectralBasis",
    "TriMesh",
    "__version__",
    "apply_match",
    "compute_basis",
    "compute_moment_set",
    "cotan_matrix",
    "descriptor_field",
    "diffusion_distance",
    "diffusion_map",
    "export_colored_ply",
    "face_areas",
    "face_gradient",
    "face_normals",
    "farthest_point_sample",
    "hks",
    "hks_derivative_signature",
    "load_mesh",
    "match_moment_sets",
    "match_points",
    "total_cost",
    "vertex_areas",
]
