"""Scoring of saliency maps against binary ground truth.

Per image, the binarization threshold is chosen optimally for the measure
(scanning all 257 cuts of an 8-bit map); per-image scores average into a
dataset score, and dataset scores average into the overall figure.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_BETA2 = 0.3

MEASURES = ("fbeta", "mcc")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion(binary_map: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    """Pixel counts of the four agreement cases between two boolean masks."""
    if binary_map.shape != gt.shape:
        raise ValueError(f"shape mismatch: {binary_map.shape} vs {gt.shape}")
    pred = binary_map.astype(bool)
    truth = gt.astype(bool)
    tp = int(np.count_nonzero(pred & truth))
    fp = int(np.count_nonzero(pred & ~truth))
    fn = int(np.count_nonzero(~pred & truth))
    tn = pred.size - tp - fp - fn
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def f_beta(c: ConfusionCounts, beta2: float = DEFAULT_BETA2) -> tuple[float, bool]:
    """Weighted harmonic mean of precision and recall; beta2 < 1 favors precision.

    Returns (score, degenerate). Empty ground truth with an empty prediction
    counts as a perfect 1 but is flagged; tp = 0 against any nonempty
    reference or prediction is 0.
    """
    if beta2 <= 0:
        raise ValueError("beta2 must be > 0")
    if c.tp == 0:
        if c.fp == 0 and c.fn == 0:
            return 1.0, True
        return 0.0, False
    return (1.0 + beta2) * c.tp / ((1.0 + beta2) * c.tp + c.fp + beta2 * c.fn), False


def mcc(c: ConfusionCounts) -> tuple[float, bool]:
    """Correlation between predicted and true labels, in [-1, 1].

    Returns (score, degenerate); a zero factor in the denominator (a fully
    one-sided prediction or reference) yields 0, flagged.
    """
    denom = (
        float(c.tp + c.fp) * float(c.tp + c.fn) * float(c.tn + c.fp) * float(c.tn + c.fn)
    )
    if denom == 0.0:
        return 0.0, True
    num = float(c.tp) * float(c.tn) - float(c.fp) * float(c.fn)
    return num / math.sqrt(denom), False


def _counts_per_threshold(sal: np.ndarray, gt: np.ndarray):
    """tp/fp/fn/tn for every cut `sal >= t`, t in 0..256, from two histograms."""
    truth = gt.astype(bool)
    pos = np.bincount(sal[truth].ravel(), minlength=256).astype(np.int64)
    neg = np.bincount(sal[~truth].ravel(), minlength=256).astype(np.int64)
    n_pos = int(pos.sum())
    n_neg = int(neg.sum())
    # cum[t] = count of values < t, so tp(t) = n_pos - cum_pos[t]
    cum_pos = np.concatenate(([0], np.cumsum(pos)))
    cum_neg = np.concatenate(([0], np.cumsum(neg)))
    tp = n_pos - cum_pos
    fp = n_neg - cum_neg
    fn = cum_pos
    tn = cum_neg
    return tp, fp, fn, tn


def _scores_fbeta(tp, fp, fn, tn, beta2: float):
    num = (1.0 + beta2) * tp
    den = (1.0 + beta2) * tp + fp + beta2 * fn
    empty = (tp == 0) & (fp == 0) & (fn == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(tp > 0, num / np.where(den > 0, den, 1), 0.0)
    return np.where(empty, 1.0, s)


def _scores_mcc(tp, fp, fn, tn, beta2: float):
    tp = tp.astype(np.float64)
    fp = fp.astype(np.float64)
    fn = fn.astype(np.float64)
    tn = tn.astype(np.float64)
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    num = tp * tn - fp * fn
    with np.errstate(divide="ignore", invalid="ignore"):
        s = num / np.sqrt(np.where(den > 0, den, 1))
    return np.where(den > 0, s, 0.0)


_SCORE_FNS = {"fbeta": _scores_fbeta, "mcc": _scores_mcc}


def best_threshold(
    sal: np.ndarray, gt: np.ndarray, measure: str = "fbeta", beta2: float = DEFAULT_BETA2
) -> tuple[int, float]:
    """Optimal cut of an 8-bit saliency map for the given measure.

    Scans the 257 binarizations `sal >= t` (t = 0 is all-foreground, t = 256
    all-background) and returns (threshold, score) with the smallest t
    attaining the best score.
    """
    if sal.shape != gt.shape:
        raise ValueError(f"shape mismatch: {sal.shape} vs {gt.shape}")
    if sal.dtype != np.uint8:
        raise ValueError(f"expected uint8 saliency map, got {sal.dtype}")
    if measure not in _SCORE_FNS:
        raise ValueError(f"unknown measure {measure!r}")
    tp, fp, fn, tn = _counts_per_threshold(sal, gt)
    scores = _SCORE_FNS[measure](tp, fp, fn, tn, beta2)
    t = int(np.argmax(scores))
    return t, float(scores[t])


@dataclass
class ImageScore:
    name: str
    threshold: int
    score: float
    flags: list[str] = field(default_factory=list)


@dataclass
class DatasetReport:
    measure: str
    beta2: float
    images: list[ImageScore]
    skipped: list[tuple[str, str]] = field(default_factory=list)

    @property
    def mean_score(self) -> float:
        if not self.images:
            return float("nan")
        # value-sorted summation keeps the mean independent of image order
        return float(np.mean(np.sort([im.score for im in self.images])))


@dataclass
class BenchmarkReport:
    """Scores for one or more datasets; overall = mean of dataset means."""

    measure: str
    beta2: float
    datasets: dict[str, DatasetReport]

    @property
    def overall(self) -> float:
        means = [self.datasets[k].mean_score for k in sorted(self.datasets)]
        if not means:
            return float("nan")
        return float(np.mean(means))


def binarize_gt(gt_gray: np.ndarray) -> np.ndarray:
    """Benchmark ground truths are nominally binary but stored 8-bit."""
    return gt_gray > 127


def score_image(
    name: str, sal: np.ndarray, gt: np.ndarray, measure: str, beta2: float
) -> ImageScore:
    t, s = best_threshold(sal, gt, measure, beta2)
    flags = []
    c = confusion(sal >= t, gt)
    if measure == "fbeta":
        _, degenerate = f_beta(c, beta2)
    else:
        _, degenerate = mcc(c)
    if degenerate:
        flags.append("degenerate")
    if not gt.any():
        flags.append("empty-gt")
    return ImageScore(name=name, threshold=t, score=s, flags=flags)


def evaluate_dataset(
    pairs, measure: str = "fbeta", beta2: float = DEFAULT_BETA2, name: str = "dataset"
) -> DatasetReport:
    """Score (name, sal, gt) triples; read failures are skipped but recorded.

    pairs may yield (name, sal_array, gt_array) or (name, callable) where the
    callable returns the pair lazily (so decode errors can be recorded).
    """
    report = DatasetReport(measure=measure, beta2=beta2, images=[])
    for item in pairs:
        if len(item) == 2:
            img_name, loader = item
            try:
                sal, gt = loader()
            except Exception as exc:
                report.skipped.append((img_name, str(exc)))
                continue
        else:
            img_name, sal, gt = item
        if sal.shape != gt.shape:
            report.skipped.append((img_name, f"shape mismatch {sal.shape} vs {gt.shape}"))
            continue
        report.images.append(score_image(img_name, sal, gt, measure, beta2))
    return report


def evaluate_benchmarks(
    datasets: dict[str, list], measure: str = "fbeta", beta2: float = DEFAULT_BETA2
) -> BenchmarkReport:
    return BenchmarkReport(
        measure=measure,
        beta2=beta2,
        datasets={
            name: evaluate_dataset(pairs, measure, beta2, name=name)
            for name, pairs in datasets.items()
        },
    )


def pair_by_stem(pred_dir: Path, gt_dir: Path) -> list[tuple[str, Path, Path]]:
    """Match prediction and ground-truth files by filename stem."""
    gt_by_stem = {}
    for p in sorted(Path(gt_dir).iterdir()):
        if p.is_file():
            gt_by_stem.setdefault(p.stem, p)
    out = []
    for p in sorted(Path(pred_dir).iterdir()):
        if p.is_file() and p.stem in gt_by_stem:
            out.append((p.stem, p, gt_by_stem[p.stem]))
    return out


def write_csv(report: DatasetReport, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["image", "best_threshold", "score", "flags"])
        for im in report.images:
            writer.writerow([im.name, im.threshold, f"{im.score:.6f}", ";".join(im.flags)])
        for name, reason in report.skipped:
            writer.writerow([name, "", "", f"skipped: {reason}"])
