"""Partition-tree saliency: hierarchical segmentation turned into a saliency
decomposition, with single-click object selection, benchmark scoring, and
grasp-pose geometry on top."""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
