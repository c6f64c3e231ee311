"""
Clustering Package

k-means variants and centroid matching
"""

from .kmeans import ClusterResult, constrained_kmeans, kmeanspp_init, lloyd_kmeans
from .matching import Matching, match_centroids
from .pipeline import best_of_restarts, full_cowal_clustering

__all__ = [
    "ClusterResult",
    "Matching",
    "best_of_restarts",
    "constrained_kmeans",
    "full_cowal_clustering",
    "kmeanspp_init",
    "lloyd_kmeans",
    "match_centroids",
]
