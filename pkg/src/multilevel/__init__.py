"""Decomposability and multilevel entanglement of multipartite pure states."""

__version__ = "0.1.0"
