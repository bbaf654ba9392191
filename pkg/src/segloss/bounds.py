"""Approximation bounds between similarity metrics: closed-form
calculators, brute-force verification of the suprema over the discrete
pair space, and the executable blow-up witness for the weighted-Hamming
non-approximation result.

Conventions for the empirical suprema: the single both-empty pair is
excluded entirely, and pairs where either similarity is exactly 0 are
additionally excluded from the relative-ratio supremum (the ratio is
vacuous or infinite there).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DTooLarge, EmptySet, NonPositiveWeight, OutOfRange
from .masks import BinaryMask, ProbMap, bit_matrix, threshold
from .metrics import (
    dice,
    dice_from_counts,
    hamming_from_counts,
    jaccard,
    jaccard_from_counts,
    tversky_from_counts,
    weighted_hamming_from_counts,
)

MAX_BRUTE_FORCE_D = 12

# slack absorbing double rounding in the empirical-vs-closed-form checks
BOUND_SLACK = 1e-12


def dice_jaccard_bounds() -> tuple[float, float]:
    """Tight absolute and relative error between Dice and Jaccard.

    The absolute supremum of |x - x/(2-x)| over [0, 1] sits at
    x = 2 - sqrt(2) and equals 3 - 2*sqrt(2); the relative error is 1.
    """
    return 3.0 - 2.0 * math.sqrt(2.0), 1.0


def tversky_dice_bounds(alpha: float, beta: float) -> tuple[float, float]:
    """Tight absolute and relative error between the Tversky index and
    Dice: abs = max over the two weights w of |(sqrt(2w)-1)/(sqrt(2w)+1)|,
    rel = max(2a, 2b, 0.5/a, 0.5/b) - 1.  Both vanish iff a = b = 0.5 and
    grow as the weights deviate from it.
    """
    if alpha <= 0 or beta <= 0:
        raise NonPositiveWeight(f"alpha and beta must be > 0, got {alpha}, {beta}")

    def one_sided(w: float) -> float:
        r = math.sqrt(2.0 * w)
        return abs((r - 1.0) / (r + 1.0))

    abs_err = max(one_sided(alpha), one_sided(beta))
    rel_err = max(2.0 * alpha, 2.0 * beta, 0.5 / alpha, 0.5 / beta) - 1.0
    return abs_err, rel_err


@dataclass(frozen=True)
class MetricId:
    """A similarity name with optional parameters, e.g. tversky:0.3:0.7."""

    kind: str
    params: tuple[float, ...] = ()

    def label(self) -> str:
        if not self.params:
            return self.kind
        return self.kind + "".join(f":{p:g}" for p in self.params)


def parse_metric_id(token: str) -> MetricId:
    """Parse dice | jaccard | hamming | whamming[:<gamma>] |
    tversky:<alpha>:<beta>.  whamming defaults to gamma = 0.5."""
    parts = token.strip().split(":")
    head = parts[0]
    try:
        if head in ("dice", "jaccard", "hamming") and len(parts) == 1:
            return MetricId(head)
        if head == "whamming" and len(parts) in (1, 2):
            gamma = float(parts[1]) if len(parts) == 2 else 0.5
            if not 0.0 <= gamma <= 1.0:
                raise OutOfRange(f"gamma must lie in [0, 1], got {gamma}")
            return MetricId(head, (gamma,))
        if head == "tversky" and len(parts) == 3:
            a, b = float(parts[1]), float(parts[2])
            if a <= 0 or b <= 0:
                raise NonPositiveWeight(f"tversky weights must be > 0, got {a}, {b}")
            return MetricId(head, (a, b))
    except ValueError as exc:
        raise OutOfRange(f"bad numeric parameter in metric token {token!r}") from exc
    raise OutOfRange(f"unknown metric token {token!r}")


def _normalize(mid: MetricId) -> MetricId:
    """Fold the Tversky special points onto their named equivalents."""
    if mid.kind == "tversky":
        if mid.params == (0.5, 0.5):
            return MetricId("dice")
        if mid.params == (1.0, 1.0):
            return MetricId("jaccard")
    return mid


def closed_form_bounds(a: MetricId, b: MetricId) -> tuple[float | None, float | None]:
    """Closed-form (abs, rel) bound for a metric pair, when one is known.

    Dice vs any Hamming flavour has the trivial absolute bound 1 (both
    similarities live in [0, 1]) and no finite relative bound.
    Unknown pairs yield (None, None).
    """
    na, nb = _normalize(a), _normalize(b)
    if na == nb:
        return 0.0, 0.0
    kinds = {na.kind, nb.kind}
    if kinds == {"dice", "jaccard"}:
        return dice_jaccard_bounds()
    if kinds == {"dice", "tversky"}:
        tv = na if na.kind == "tversky" else nb
        return tversky_dice_bounds(*tv.params)
    if kinds in ({"dice", "hamming"}, {"dice", "whamming"}):
        return 1.0, math.inf
    return None, None


def _evaluator(mid: MetricId, d: int):
    """Vectorized metric over confusion-count arrays (tp, fp, fn)."""
    if mid.kind == "dice":
        return lambda tp, fp, fn: dice_from_counts(tp, fp, fn)
    if mid.kind == "jaccard":
        return lambda tp, fp, fn: jaccard_from_counts(tp, fp, fn)
    if mid.kind == "hamming":
        return lambda tp, fp, fn: hamming_from_counts(fp, fn, d)
    if mid.kind == "whamming":
        gamma = mid.params[0]
        return lambda tp, fp, fn: weighted_hamming_from_counts(fp, fn, tp + fn, d, gamma)
    if mid.kind == "tversky":
        a, b = mid.params
        return lambda tp, fp, fn: tversky_from_counts(tp, fp, fn, a, b)
    raise OutOfRange(f"unknown metric kind {mid.kind!r}")


@dataclass(frozen=True)
class Witness:
    """A (y, ŷ) pair attaining an empirical supremum, with its counts."""

    y: BinaryMask
    yhat: BinaryMask
    tp: int
    fp: int
    fn: int
    value: float

    @property
    def n_true(self) -> int:
        return self.tp + self.fn

    @property
    def n_pred(self) -> int:
        return self.tp + self.fp


@dataclass(frozen=True)
class BoundReport:
    metric_a: str
    metric_b: str
    d: int
    closed_form_abs: float | None
    closed_form_rel: float | None  # math.inf when no finite bound exists
    empirical_abs: float
    empirical_rel: float
    witness: Witness | None        # attains empirical_abs
    witness_rel: Witness | None    # attains empirical_rel


# composite tie-break key: (value desc, max(|y|,|ŷ|) asc, |y| asc, pair index
# asc) -- the simplest, most size-balanced witness wins, deterministically
# and independently of how the pair space was partitioned
_EXCLUDED = -1.0


def _chunk_best(values, py_col, ph_row, ylo, n, d):
    vmax = float(values.max())
    if vmax == _EXCLUDED:
        return None
    tied = values == vmax
    sentinel = d + 1
    maxsize = np.maximum(py_col, ph_row)
    ms = int(np.where(tied, maxsize, sentinel).min())
    tied &= maxsize == ms
    ptrue = int(np.where(tied, np.broadcast_to(py_col, tied.shape), sentinel).min())
    tied &= py_col == ptrue
    flat = int(np.argmax(tied))
    row, col = divmod(flat, n)
    return vmax, ms, ptrue, (ylo + row) * n + col, ylo + row, col


def _better(a, b):
    """Merge two chunk candidates; None loses."""
    if a is None:
        return b
    if b is None:
        return a
    if a[0] != b[0]:
        return a if a[0] > b[0] else b
    return a if a[1:4] < b[1:4] else b


def _scan_chunk(M, pop, ylo, yhi, fa, fb, d):
    n = M.shape[0]
    tp = M[ylo:yhi] @ M.T
    py = pop[ylo:yhi][:, None]
    ph = pop[None, :]
    fp = ph - tp
    fn = py - tp
    va = np.asarray(fa(tp, fp, fn), dtype=np.float64)
    vb = np.asarray(fb(tp, fp, fn), dtype=np.float64)
    both_empty = (py + ph) == 0

    absdiff = np.abs(va - vb)
    absdiff[np.broadcast_to(both_empty, absdiff.shape)] = _EXCLUDED
    best_abs = _chunk_best(absdiff, py, ph, ylo, n, d)

    admissible = (va > 0.0) & (vb > 0.0) & ~both_empty
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.maximum(va / vb, vb / va) - 1.0
    ratio = np.where(admissible, ratio, _EXCLUDED)
    best_rel = _chunk_best(ratio, py, ph, ylo, n, d)
    return best_abs, best_rel


def _build_witness(cand, M, d) -> Witness | None:
    if cand is None:
        return None
    value, _, _, _, yi, hi = cand
    yrow = M[yi].astype(np.uint8)
    hrow = M[hi].astype(np.uint8)
    tp = int(yrow @ hrow)
    fp = int(hrow.sum()) - tp
    fn = int(yrow.sum()) - tp
    dims = (d, 1, 1)
    return Witness(BinaryMask(dims, yrow), BinaryMask(dims, hrow), tp, fp, fn, value)


def brute_force_sup(metric_a, metric_b, d: int, threads: int = 1) -> BoundReport:
    """Exact suprema of |A - B| and max(A/B, B/A) - 1 over every ordered
    mask pair of length d, by full enumeration of the 4**d pair space.

    The scan is vectorized over the lexicographic pair order; partitioning
    across threads cannot change the result because the reduction key is
    order independent.  When a closed form exists the empirical value is
    checked against it (with 1e-12 slack for double rounding).
    """
    if d < 1:
        raise OutOfRange("d must be >= 1")
    if d > MAX_BRUTE_FORCE_D:
        raise DTooLarge(f"d = {d} exceeds the brute-force limit {MAX_BRUTE_FORCE_D}")
    mid_a = parse_metric_id(metric_a) if isinstance(metric_a, str) else metric_a
    mid_b = parse_metric_id(metric_b) if isinstance(metric_b, str) else metric_b

    M = bit_matrix(d, dtype=np.float64)
    pop = M.sum(axis=1)
    n = M.shape[0]
    fa = _evaluator(mid_a, d)
    fb = _evaluator(mid_b, d)

    chunk = 256 if d > 8 else n
    ranges = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: _scan_chunk(M, pop, r[0], r[1], fa, fb, d), ranges))
    else:
        parts = [_scan_chunk(M, pop, lo, hi, fa, fb, d) for lo, hi in ranges]

    best_abs = best_rel = None
    for pa, pr in parts:
        best_abs = _better(best_abs, pa)
        best_rel = _better(best_rel, pr)

    w_abs = _build_witness(best_abs, M, d)
    w_rel = _build_witness(best_rel, M, d)
    emp_abs = w_abs.value if w_abs else 0.0
    emp_rel = w_rel.value if w_rel else 0.0

    cf_abs, cf_rel = closed_form_bounds(mid_a, mid_b)
    if cf_abs is not None and emp_abs > cf_abs + BOUND_SLACK:
        raise RuntimeError(
            f"empirical abs {emp_abs!r} exceeds closed form {cf_abs!r} for "
            f"{mid_a.label()} vs {mid_b.label()} at d={d}"
        )
    if cf_rel is not None and math.isfinite(cf_rel) and emp_rel > cf_rel + BOUND_SLACK:
        raise RuntimeError(
            f"empirical rel {emp_rel!r} exceeds closed form {cf_rel!r} for "
            f"{mid_a.label()} vs {mid_b.label()} at d={d}"
        )
    return BoundReport(
        mid_a.label(), mid_b.label(), d, cf_abs, cf_rel, emp_abs, emp_rel, w_abs, w_rel
    )


@dataclass(frozen=True)
class HammingBlowupWitness:
    """One member of the proof family |y \\ ŷ| = 0, |ŷ \\ y| = a*d,
    |y ∩ ŷ| = a^2*d, with d chosen so all counts are integers."""

    tp: int
    fp: int
    fn: int
    d: int
    gamma_star: float
    hamming_value: float   # H_gamma* , minimized over gamma
    dice_value: float
    ratio: float           # hamming_value / dice_value, grows like 1/(2a)


def hamming_blowup_witness(a: float) -> HammingBlowupWitness:
    """Instantiate the family showing Dice and best-gamma weighted Hamming
    do not relatively approximate each other: the H/D ratio exceeds any
    threshold as a -> 0.

    a must lie in (0, (sqrt(5)-1)/2) so the predicted mask fits in d
    pixels.  a is snapped to a nearby fraction p/q and d = q**2 makes the
    counts exact integers.
    """
    if not 0.0 < a < (math.sqrt(5.0) - 1.0) / 2.0:
        raise OutOfRange(f"a must lie in (0, (sqrt(5)-1)/2), got {a}")
    frac = Fraction(a).limit_denominator(10 ** 6)
    p, q = frac.numerator, frac.denominator
    d = q * q
    tp, fp, fn = p * p, p * q, 0
    n_true = tp + fn
    # H_gamma is linear in gamma, so the minimum over [0, 1] sits at a
    # boundary; with fn = 0 that is gamma = 0
    h0 = float(weighted_hamming_from_counts(fp, fn, n_true, d, 0.0))
    h1 = float(weighted_hamming_from_counts(fp, fn, n_true, d, 1.0))
    gamma_star, h_star = (0.0, h0) if h0 <= h1 else (1.0, h1)
    d_val = float(dice_from_counts(tp, fp, fn))
    return HammingBlowupWitness(tp, fp, fn, d, gamma_star, h_star, d_val, h_star / d_val)


@dataclass(frozen=True)
class RiskInequalityReport:
    pointwise_ok: bool
    jensen_ok: bool
    n: int
    mean_dice_loss: float
    mean_jaccard_loss: float


def risk_inequality_check(samples) -> RiskInequalityReport:
    """Check 1-D <= 1-J per sample and the Jensen direction
    mean(1-J) <= phi(mean(1-D)) with phi(x) = 2x/(1+x).

    Relaxed predictions are thresholded at 0.5 first.
    """
    pairs = list(samples)
    if not pairs:
        raise EmptySet("risk_inequality_check needs at least one sample")
    dl = np.empty(len(pairs))
    jl = np.empty(len(pairs))
    for i, (y, pred) in enumerate(pairs):
        if isinstance(pred, ProbMap):
            pred = threshold(pred, 0.5)
        dl[i] = 1.0 - dice(y, pred)
        jl[i] = 1.0 - jaccard(y, pred)
    pointwise_ok = bool(np.all(dl <= jl))
    mean_d = float(dl.mean())
    mean_j = float(jl.mean())
    # equality cases (e.g. a single sample) can differ by one ulp between the
    # two evaluation routes; the usual rounding slack absorbs that
    jensen_ok = mean_j <= 2.0 * mean_d / (1.0 + mean_d) + BOUND_SLACK
    return RiskInequalityReport(pointwise_ok, jensen_ok, len(pairs), mean_d, mean_j)
