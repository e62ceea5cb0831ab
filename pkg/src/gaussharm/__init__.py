"""Weighted discrete exterior calculus and stability spectra on self-shrinking surfaces."""

__version__ = "0.1.0"

from .dec import weighted_stars, weighted_stiffness, exterior_derivatives  # noqa: E402
from .errors import GaussHarmError  # noqa: E402
from .geometry import curvature_data, shrinker_residual  # noqa: E402
from .ghf import ghf_basis, minimize_in_class  # noqa: E402
from .homology import periods, tree_cotree_generators  # noqa: E402
from .mesh import TriMesh, build_mesh, topology_invariants  # noqa: E402
from .operators import build_L_pencil, drift_apply, lowest_eigenpairs, morse_index  # noqa: E402

__all__ = [
    "TriMesh",
    "build_mesh",
    "topology_invariants",
    "curvature_data",
    "shrinker_residual",
    "exterior_derivatives",
    "weighted_stars",
    "weighted_stiffness",
    "tree_cotree_generators",
    "periods",
    "minimize_in_class",
    "ghf_basis",
    "build_L_pencil",
    "drift_apply",
    "lowest_eigenpairs",
    "morse_index",
    "GaussHarmError",
]
