"""Desk-scale empirical harness: synthetic blob datasets, a linear
per-pixel classifier trained by plain gradient descent under any LossSpec,
and the experiment protocols (loss comparison, Tversky sweep, object-size
stratification, fg/bg output masking).

Every operation is a pure function of its inputs and seed; reruns agree
bit for bit.  Independent (fold x arm) runs get seeds derived by hashing
(global seed, fold, arm) and may execute in any order or in parallel.
Evaluation only ever uses the discrete metrics at threshold 0.5; the
training loss never contaminates it.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    EmptySet,
    InfeasibleConfig,
    InfeasibleRatio,
    NonFiniteLoss,
    OutOfRange,
    TooFewSamples,
)
from .losses import LossSpec, eval_loss_arrays
from .masks import BinaryMask
from .metrics import dice_from_counts, fbeta_from_counts, jaccard_from_counts

N_FEATURES = 5  # raw, 3x3 box mean, x/nx, y/ny, constant 1

# intensity ramp of the blob edge, linear in the squared elliptical radial
# coordinate: intensity 0.5 falls exactly on the label boundary (rho^2 = 1)
# and the ambiguous band covers equal areas inside and outside the label
_EDGE_Q_LO = 0.55
_EDGE_Q_HI = 1.45

# default per-image multiplicative intensity gain jitter: no single global
# intensity threshold matches every image's label boundary, so pixel-wise
# calibration alone cannot solve the task; 0 makes noise-free data linearly
# separable on the raw intensity feature
DEFAULT_GAIN_JITTER = 0.6

VAL_FRACTION = 0.2       # last 20% of training images by index
PLATEAU_DIVISOR = 5.0    # learning-rate cut on validation plateau

FBETAS = (0.5, 1.0, 1.5, 2.0)

SWEEP_ALPHAS = tuple(round(0.1 * k, 10) for k in range(1, 10))
SWEEP_EQUAL_ARMS = (0.75, 1.0)

FGBG_RATIOS = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed from integer components."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


@dataclass(frozen=True)
class SyntheticConfig:
    n_images: int = 200
    dims: tuple[int, int] = (64, 64)
    object_radius_range: tuple[float, float] = (3.0, 9.0)
    fg_prior_target: float = 0.02
    noise_sigma: float = 0.3
    seed: int = 7
    gain_jitter: float = DEFAULT_GAIN_JITTER

    def __post_init__(self):
        if self.n_images < 1:
            raise OutOfRange("n_images must be >= 1")
        nx, ny = self.dims
        rmin, rmax = self.object_radius_range
        if nx < 4 or ny < 4:
            raise OutOfRange("image dims too small")
        if rmin <= 0 or rmax < rmin:
            raise OutOfRange("invalid radius range")
        if 2 * rmax + 4 > min(nx, ny):
            raise InfeasibleConfig("largest radius does not fit inside dims")
        if not 0.0 < self.fg_prior_target < 1.0:
            raise OutOfRange("fg_prior_target must lie in (0, 1)")
        if self.noise_sigma < 0:
            raise OutOfRange("noise_sigma must be >= 0")
        if not 0.0 <= self.gain_jitter < 1.0:
            raise OutOfRange("gain_jitter must lie in [0, 1)")
        if self.seed < 0:
            raise OutOfRange("seed must be >= 0")


@dataclass(frozen=True, eq=False)
class Sample:
    features: np.ndarray  # (d, N_FEATURES) float64
    label: BinaryMask


@dataclass(eq=False)
class SampleSet:
    samples: list[Sample]

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i: int) -> Sample:
        return self.samples[i]

    @property
    def dims(self):
        return self.samples[0].label.dims

    def fg_counts(self) -> np.ndarray:
        return np.array([s.label.count() for s in self.samples])

    def mean_fg_prior(self) -> float:
        counts = self.fg_counts()
        return float(counts.mean() / self.samples[0].label.d)

    def subset(self, idx) -> "SampleSet":
        return SampleSet([self.samples[int(i)] for i in idx])


def _box3(img: np.ndarray) -> np.ndarray:
    """3x3 box mean with edge replication."""
    p = np.pad(img, 1, mode="edge")
    return (
        p[:-2, :-2] + p[:-2, 1:-1] + p[:-2, 2:]
        + p[1:-1, :-2] + p[1:-1, 1:-1] + p[1:-1, 2:]
        + p[2:, :-2] + p[2:, 1:-1] + p[2:, 2:]
    ) / 9.0


def generate_dataset(cfg: SyntheticConfig) -> SampleSet:
    """Images with 1-3 soft-edged elliptical blobs plus Gaussian noise.

    Per-image blob areas are drawn so the dataset-mean foreground prior
    lands within +-20% (relative) of the target; infeasible radius ranges
    are rejected up front.
    """
    nx, ny = cfg.dims
    rmin, rmax = cfg.object_radius_range
    d_img = nx * ny
    target = cfg.fg_prior_target * d_img
    area_lo = math.pi * rmin * rmin
    area_hi = 3.0 * math.pi * rmax * rmax
    if area_lo > 1.2 * target or area_hi < 0.8 * target:
        raise InfeasibleConfig(
            f"target foreground area {target:.1f}px not reachable with radii "
            f"[{rmin}, {rmax}] and 1-3 blobs"
        )

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    ys = np.arange(ny, dtype=np.float64)[:, None]
    xs = np.arange(nx, dtype=np.float64)[None, :]
    xnorm = np.broadcast_to(xs / (nx - 1), (ny, nx)).ravel()
    ynorm = np.broadcast_to(ys / (ny - 1), (ny, nx)).ravel()
    ones = np.ones(d_img)

    samples = []
    for _ in range(cfg.n_images):
        t_img = float(np.clip(target * rng.uniform(0.7, 1.3), area_lo, area_hi))
        k_lo = max(1, math.ceil(t_img / (math.pi * rmax * rmax)))
        k_hi = min(3, max(1, math.floor(t_img / (math.pi * rmin * rmin))))
        k = int(rng.integers(k_lo, k_hi + 1)) if k_lo < k_hi else k_lo
        parts = rng.dirichlet(np.full(k, 4.0)) * t_img
        areas = np.clip(parts, math.pi * rmin * rmin, math.pi * rmax * rmax)

        label = np.zeros((ny, nx), dtype=bool)
        intensity = np.zeros((ny, nx))
        placed: list[tuple[float, float, float]] = []
        for a_blob in areas:
            r0 = math.sqrt(a_blob / math.pi)
            aspect = rng.uniform(0.78, 1.28)
            rx = float(np.clip(r0 * aspect, rmin, rmax))
            ry = float(np.clip(r0 / aspect, rmin, rmax))
            rr = max(rx, ry)
            theta = rng.uniform(0.0, math.pi)
            cx = cy = 0.0
            for _attempt in range(8):
                cx = rng.uniform(rr + 1.0, nx - 2.0 - rr)
                cy = rng.uniform(rr + 1.0, ny - 2.0 - rr)
                if all(
                    math.hypot(cx - ox, cy - oy) >= 0.9 * (rr + orr)
                    for ox, oy, orr in placed
                ):
                    break
            placed.append((cx, cy, rr))
            dx = xs - cx
            dy = ys - cy
            ct, st = math.cos(theta), math.sin(theta)
            u = (dx * ct + dy * st) / rx
            v = (-dx * st + dy * ct) / ry
            rho2 = u * u + v * v
            label |= rho2 <= 1.0
            intensity = np.maximum(
                intensity,
                np.clip((_EDGE_Q_HI - rho2) / (_EDGE_Q_HI - _EDGE_Q_LO), 0.0, 1.0),
            )

        img = intensity
        if cfg.gain_jitter > 0:
            img = img * rng.uniform(1.0 - cfg.gain_jitter, 1.0 + cfg.gain_jitter)
        if cfg.noise_sigma > 0:
            img = img + cfg.noise_sigma * rng.standard_normal((ny, nx))
        feats = np.stack(
            [img.ravel(), _box3(img).ravel(), xnorm, ynorm, ones], axis=1
        )
        samples.append(Sample(feats, BinaryMask.from_array(label.astype(np.uint8))))
    return SampleSet(samples)


@dataclass(frozen=True)
class TrainConfig:
    loss: LossSpec
    learning_rate: float = 4.0
    max_epochs: int = 120
    batch_size: int = 4
    pretrain_epochs_ce: int = 10
    early_stop_patience: int = 12
    seed: int = 0
    # one shared mask, or one mask per image of the data passed to train()
    output_mask: object = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise OutOfRange("learning_rate must be > 0")
        if self.max_epochs < 0 or self.pretrain_epochs_ce < 0:
            raise OutOfRange("epoch counts must be >= 0")
        if self.batch_size < 1 or self.early_stop_patience < 1:
            raise OutOfRange("batch_size and early_stop_patience must be >= 1")
        if self.seed < 0:
            raise OutOfRange("seed must be >= 0")


@dataclass
class TrainResult:
    weights: np.ndarray
    epochs_run: int
    best_val_loss: float
    train_losses: np.ndarray
    val_losses: np.ndarray


def _sigmoid(s: np.ndarray) -> np.ndarray:
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    es = np.exp(s[~pos])
    out[~pos] = es / (1.0 + es)
    return out


def _resolve_masks(data: SampleSet, output_mask) -> list[np.ndarray] | None:
    if output_mask is None:
        return None
    if isinstance(output_mask, BinaryMask):
        if output_mask.dims != data.dims:
            raise OutOfRange("output_mask dims do not match the data")
        sel = output_mask.data.astype(bool)
        return [sel] * len(data)
    masks = list(output_mask)
    if len(masks) != len(data):
        raise OutOfRange("need one output mask per image")
    out = []
    for m, s in zip(masks, data):
        if m.dims != s.label.dims:
            raise OutOfRange("output_mask dims do not match the data")
        out.append(m.data.astype(bool))
    return out


def _prepare(data: SampleSet, masks) -> list[tuple[np.ndarray, np.ndarray]]:
    items = []
    for i, s in enumerate(data):
        if masks is None:
            items.append((s.features, s.label.data.astype(np.float64)))
        else:
            sel = masks[i]
            items.append((s.features[sel], s.label.data[sel].astype(np.float64)))
    return items


def _image_grad(spec: LossSpec, X: np.ndarray, yv: np.ndarray, w: np.ndarray) -> np.ndarray:
    p = _sigmoid(X @ w)
    _, gp, _ = eval_loss_arrays(spec, yv, p)
    return X.T @ (gp * p * (1.0 - p))


def _mean_loss(items, w: np.ndarray, spec: LossSpec) -> float:
    total = 0.0
    for X, yv in items:
        total += eval_loss_arrays(spec, yv, _sigmoid(X @ w))[0]
    return total / len(items)


def _run_epoch(items, w: np.ndarray, spec: LossSpec, lr: float, batch_size: int, rng) -> np.ndarray:
    order = rng.permutation(len(items))
    for lo in range(0, order.size, batch_size):
        batch = order[lo:lo + batch_size]
        g = np.zeros_like(w)
        for idx in batch:
            X, yv = items[idx]
            g += _image_grad(spec, X, yv, w)
        w = w - lr * (g / batch.size)
    return w


def train(data: SampleSet, cfg: TrainConfig) -> TrainResult:
    """Gradient descent on the mean per-image loss of a linear per-pixel
    scorer (5 features -> logit -> sigmoid).

    Runs a CE warm-up for cfg.pretrain_epochs_ce epochs, then switches to
    cfg.loss with the optimizer state (learning rate, plateau counters)
    reset.  The learning rate is divided by 5 on a validation-loss
    plateau; training stops when the patience is exhausted.  Returns the
    weights with the best validation loss seen in the main phase.
    """
    if len(data) == 0:
        raise EmptySet("train needs at least one image")
    masks = _resolve_masks(data, cfg.output_mask)
    items = _prepare(data, masks)
    n = len(items)
    n_val = int(round(VAL_FRACTION * n))
    n_val = min(n_val, n - 1)
    train_items = items[: n - n_val] if n_val > 0 else items
    val_items = items[n - n_val:] if n_val > 0 else items

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    w = rng.normal(0.0, 0.5, N_FEATURES)

    ce = LossSpec.ce()
    for _ in range(cfg.pretrain_epochs_ce):
        w = _run_epoch(train_items, w, ce, cfg.learning_rate, cfg.batch_size, rng)
        if not np.all(np.isfinite(w)):
            raise NonFiniteLoss("CE pretraining diverged to non-finite weights")

    lr = cfg.learning_rate
    best_val = _mean_loss(val_items, w, cfg.loss)
    if not math.isfinite(best_val):
        raise NonFiniteLoss(f"initial validation loss is {best_val}")
    best_w = w.copy()
    stall = 0
    plateau_every = max(1, cfg.early_stop_patience // 2)
    train_hist: list[float] = []
    val_hist: list[float] = []
    epochs_run = 0
    for epoch in range(cfg.max_epochs):
        w = _run_epoch(train_items, w, cfg.loss, lr, cfg.batch_size, rng)
        tr = _mean_loss(train_items, w, cfg.loss)
        vl = _mean_loss(val_items, w, cfg.loss)
        if not (math.isfinite(tr) and math.isfinite(vl)):
            raise NonFiniteLoss(
                f"non-finite loss at epoch {epoch}: train={tr} val={vl} "
                f"(loss={cfg.loss.label()}, lr={lr})"
            )
        train_hist.append(tr)
        val_hist.append(vl)
        epochs_run = epoch + 1
        if vl < best_val:
            best_val, best_w, stall = vl, w.copy(), 0
        else:
            stall += 1
            if stall % plateau_every == 0:
                lr /= PLATEAU_DIVISOR
            if stall >= cfg.early_stop_patience:
                break
    return TrainResult(best_w, epochs_run, best_val, np.array(train_hist), np.array(val_hist))


def _counts_at_half(yv: np.ndarray, p: np.ndarray) -> tuple[int, int, int]:
    pred = p > 0.5
    true = yv > 0.5
    tp = int(np.count_nonzero(pred & true))
    fp = int(np.count_nonzero(pred & ~true))
    fn = int(np.count_nonzero(~pred & true))
    return tp, fp, fn


def score_images(data: SampleSet, idx, w: np.ndarray, masks=None) -> dict[str, np.ndarray]:
    """Discrete per-image scores at threshold 0.5: dice, jaccard and the
    F-beta family, restricted to in-mask pixels when masks are given."""
    out = {"dice": [], "jaccard": []}
    for b in FBETAS:
        out[f"f{b:g}"] = []
    for i in idx:
        s = data[int(i)]
        if masks is None:
            X, yv = s.features, s.label.data.astype(np.float64)
        else:
            sel = masks[int(i)]
            X, yv = s.features[sel], s.label.data[sel].astype(np.float64)
        p = _sigmoid(X @ w)
        tp, fp, fn = _counts_at_half(yv, p)
        out["dice"].append(float(dice_from_counts(tp, fp, fn)))
        out["jaccard"].append(float(jaccard_from_counts(tp, fp, fn)))
        for b in FBETAS:
            out[f"f{b:g}"].append(float(fbeta_from_counts(tp, fp, fn, b)))
    return {k: np.array(v) for k, v in out.items()}


@dataclass
class ArmScores:
    name: str
    spec: LossSpec
    dice: np.ndarray
    jaccard: np.ndarray
    fbeta: dict[float, np.ndarray]
    fold_weights: list[np.ndarray | None] = field(repr=False)

    def mean_dice(self) -> float:
        return float(self.dice.mean())

    def mean_jaccard(self) -> float:
        return float(self.jaccard.mean())


@dataclass
class ExperimentResult:
    arms: list[ArmScores]
    folds: np.ndarray     # fold id per image
    fg_sizes: np.ndarray  # ground-truth foreground count per image

    def arm(self, name: str) -> ArmScores:
        for a in self.arms:
            if a.name == name:
                return a
        raise KeyError(name)


def run_loss_comparison(
    data: SampleSet,
    losses,
    folds: int = 5,
    seed: int = 0,
    base_cfg: TrainConfig | None = None,
    output_masks=None,
    threads: int = 1,
) -> ExperimentResult:
    """Five-fold (by default) cross-validated comparison of loss arms.

    Fold of image i is i % folds.  Per fold and arm a model is trained on
    the remaining images (the last 20% of them serving as validation for
    checkpoint selection) and scored on the left-out images, so each image
    is scored exactly once per arm.
    """
    losses = list(losses)
    n = len(data)
    if folds < 2:
        raise OutOfRange("folds must be >= 2")
    if n < folds:
        raise TooFewSamples(f"need at least {folds} images, got {n}")
    base = base_cfg if base_cfg is not None else TrainConfig(loss=LossSpec.ce())
    if output_masks is not None and len(output_masks) != n:
        raise OutOfRange("need one output mask per image")

    fold_of = np.arange(n) % folds
    fg_sizes = data.fg_counts()
    arms = [
        ArmScores(
            spec.label(), spec,
            np.full(n, np.nan), np.full(n, np.nan),
            {b: np.full(n, np.nan) for b in FBETAS},
            [None] * folds,
        )
        for spec in losses
    ]

    def run_one(job):
        f, ai = job
        test_idx = np.where(fold_of == f)[0]
        train_idx = np.where(fold_of != f)[0]
        sub = data.subset(train_idx)
        sub_masks = (
            tuple(output_masks[int(i)] for i in train_idx)
            if output_masks is not None
            else base.output_mask
        )
        cfg = replace(
            base, loss=losses[ai], seed=derive_seed(seed, f, ai), output_mask=sub_masks
        )
        res = train(sub, cfg)
        sel = (
            [output_masks[int(i)].data.astype(bool) for i in range(n)]
            if output_masks is not None
            else _resolve_masks(data, base.output_mask)
        )
        scores = score_images(data, test_idx, res.weights, sel)
        return f, ai, test_idx, res.weights, scores

    jobs = [(f, ai) for f in range(folds) for ai in range(len(losses))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_one, jobs))
    else:
        results = [run_one(j) for j in jobs]

    for f, ai, test_idx, weights, scores in results:
        arm = arms[ai]
        arm.fold_weights[f] = weights
        arm.dice[test_idx] = scores["dice"]
        arm.jaccard[test_idx] = scores["jaccard"]
        for b in FBETAS:
            arm.fbeta[b][test_idx] = scores[f"f{b:g}"]
    return ExperimentResult(arms, fold_of, fg_sizes)


def run_tversky_sweep(
    data: SampleSet,
    alphas=SWEEP_ALPHAS,
    equal_arms=SWEEP_EQUAL_ARMS,
    folds: int = 5,
    seed: int = 0,
    base_cfg: TrainConfig | None = None,
    threads: int = 1,
) -> ExperimentResult:
    """One soft-Tversky(alpha, 1-alpha) arm per alpha plus alpha = beta
    arms (0.75 and 1.0 by default), under the comparison protocol."""
    specs = [LossSpec.soft_tversky(a, round(1.0 - a, 10)) for a in alphas]
    specs += [LossSpec.soft_tversky(v, v) for v in equal_arms]
    return run_loss_comparison(data, specs, folds, seed, base_cfg, threads=threads)


class EmptyBinWarning(UserWarning):
    """A stratification bin received no images and was collapsed away."""


@dataclass
class SizeStrata:
    bin_counts: list[int]
    mean_size: list[float]
    mean_dice: dict[str, list[float]]


def stratify_by_size(result: ExperimentResult, n_bins: int = 10) -> SizeStrata:
    """Mean Dice per loss within size deciles: bin boundaries sit at the
    empirical percentiles of the ground-truth foreground counts, so
    same-size images always share a bin.

    Bins left empty by ties or by having fewer images than bins are
    collapsed into their neighbours with a warning.
    """
    sizes = result.fg_sizes
    if sizes.size == 0:
        raise EmptySet("empty experiment result")
    edges = np.quantile(sizes, [k / n_bins for k in range(1, n_bins)])
    assignment = np.searchsorted(edges, sizes, side="right")
    parts = [np.flatnonzero(assignment == b) for b in range(n_bins)]
    if any(p.size == 0 for p in parts):
        warnings.warn(
            f"{sum(1 for p in parts if p.size == 0)} empty size bins collapsed "
            f"({sizes.size} images over {n_bins} bins)",
            EmptyBinWarning,
        )
        parts = [p for p in parts if p.size > 0]
    counts = [int(p.size) for p in parts]
    mean_size = [float(sizes[p].mean()) for p in parts]
    mean_dice = {
        arm.name: [float(arm.dice[p].mean()) for p in parts] for arm in result.arms
    }
    return SizeStrata(counts, mean_size, mean_dice)


def _label_planes(data: SampleSet) -> list[np.ndarray]:
    nx, ny, nz = data.dims
    if nz != 1:
        raise OutOfRange("fg/bg masking is defined for 2D data")
    return [s.label.to_array()[0] for s in data]


def build_fgbg_masks(data: SampleSet, ratio: float):
    """Per-image rectangles of the image's aspect ratio, positioned to
    contain as much of the object as possible (all of it whenever it
    fits), with one size shared by the whole dataset chosen so the mean
    in-rectangle foreground fraction matches the requested ratio.

    Returns (masks, rect_w, rect_h, achieved_fraction).
    """
    if not 0.0 < ratio <= 1.0:
        raise OutOfRange("ratio must lie in (0, 1]")
    nx, ny, _ = data.dims
    planes = _label_planes(data)
    integrals = [
        np.pad(p.astype(np.int64).cumsum(0).cumsum(1), ((1, 0), (1, 0)))
        for p in planes
    ]

    def window_sums(integ, h, w):
        """In-rect foreground count for every rectangle position."""
        return (
            integ[h:, w:] - integ[:-h, w:] - integ[h:, :-w] + integ[:-h, :-w]
        )

    def best_origin(integ, h, w):
        sums = window_sums(integ, h, w)
        flat = int(np.argmax(sums))  # first max: smallest (top, left)
        top, left = divmod(flat, sums.shape[1])
        return top, left, int(sums[top, left])

    def mean_fraction(w):
        h = min(ny, max(1, round(w * ny / nx)))
        total = 0.0
        for integ in integrals:
            _, _, fg = best_origin(integ, h, w)
            total += fg / (w * h)
        return h, total / len(planes)

    best = None
    for w in range(1, nx + 1):
        h, frac = mean_fraction(w)
        dev = abs(frac - ratio)
        if best is None or dev < best[0]:
            best = (dev, w, h, frac)
    dev, rect_w, rect_h, achieved = best
    if dev > 0.25 * ratio:
        raise InfeasibleRatio(
            f"best rectangle gives mean fg fraction {achieved:.4f}, "
            f"target {ratio} (relative deviation {dev / ratio:.2f})"
        )
    masks = []
    for integ in integrals:
        top, left, _ = best_origin(integ, rect_h, rect_w)
        m = np.zeros((ny, nx), dtype=np.uint8)
        m[top:top + rect_h, left:left + rect_w] = 1
        masks.append(BinaryMask.from_array(m))
    return masks, rect_w, rect_h, achieved


@dataclass
class FgbgRun:
    ratio: float
    rect_w: int
    rect_h: int
    achieved_fraction: float
    result: ExperimentResult


def run_fgbg_masking(
    data: SampleSet,
    ratios=FGBG_RATIOS,
    losses=None,
    folds: int = 5,
    seed: int = 0,
    base_cfg: TrainConfig | None = None,
    threads: int = 1,
) -> list[FgbgRun]:
    """Re-run the loss comparison with per-image rectangular output masks
    at each requested in-rectangle foreground fraction; pixels outside the
    rectangle are excluded from both the loss and the evaluation."""
    if losses is None:
        losses = [LossSpec.ce(), LossSpec.soft_dice()]
    runs = []
    for ratio in ratios:
        masks, rect_w, rect_h, achieved = build_fgbg_masks(data, ratio)
        result = run_loss_comparison(
            data, losses, folds, derive_seed(seed, round(ratio * 1000)),
            base_cfg, output_masks=masks, threads=threads,
        )
        runs.append(FgbgRun(ratio, rect_w, rect_h, achieved, result))
    return runs
