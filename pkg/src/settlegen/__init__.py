"""Unsupervised settlement generation and automated evaluation on voxel terrain."""

__version__ = "0.1.0"
