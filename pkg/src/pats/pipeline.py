"""End-to-end run: image -> partition -> tree -> saliency map."""

from dataclasses import dataclass

import numpy as np

from . import partition, saliency, tree as tree_mod


@dataclass
class PipelineResult:
    labels: np.ndarray
    region_count: int
    tree: tree_mod.PartitionTree
    sal_tree: saliency.SaliencyTree
    sal_map: saliency.SaliencyMap


def run(
    img: np.ndarray,
    smooth: bool = True,
    lam: float = tree_mod.DEFAULT_LAMBDA,
    distance=None,
    kernels=None,
) -> PipelineResult:
    lab, grad, labels, count = partition.atomic_partition(img, smooth=smooth, kernels=kernels)
    t = tree_mod.build_tree(labels, count, lab, grad, lam=lam, distance=distance, kernels=kernels)
    st = saliency.propagate_hierarchical(t, kernels=kernels)
    sm = saliency.max_projection(t, st, kernels=kernels)
    return PipelineResult(labels=labels, region_count=count, tree=t, sal_tree=st, sal_map=sm)
