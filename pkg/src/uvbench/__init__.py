"""Benchmark harness for UV parameterizations of triangle meshes."""

from .mesh import EdgeAdjacency, TriMesh, build_adjacency, normalize_areas
from .metrics import MeshMetrics, compute_metrics

__version__ = "0.1.0"

__all__ = ["TriMesh", "EdgeAdjacency", "build_adjacency", "normalize_areas",
           "MeshMetrics", "compute_metrics", "__version__"]
