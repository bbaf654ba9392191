"""Shared helpers for the test suite: independent set-based oracles and
the gradient-check harness.  Everything here deliberately avoids the
library's own count/metric kernels so tests check two routes."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from segloss.losses import eval_loss, finite_diff_gradient
from segloss.masks import BinaryMask, ProbMap


def set_counts(y_bits, yhat_bits):
    """Confusion counts via literal set operations on pixel indices."""
    ys = {i for i, v in enumerate(y_bits) if v}
    hs = {i for i, v in enumerate(yhat_bits) if v}
    d = len(y_bits)
    tp = len(ys & hs)
    fp = len(hs - ys)
    fn = len(ys - hs)
    return tp, fp, fn, d - tp - fp - fn


def frac_dice(tp, fp, fn):
    den = 2 * tp + fp + fn
    return Fraction(1) if den == 0 else Fraction(2 * tp, den)


def frac_jaccard(tp, fp, fn):
    den = tp + fp + fn
    return Fraction(1) if den == 0 else Fraction(tp, den)


def frac_hamming(fp, fn, d):
    return 1 - Fraction(fp + fn, d)


def frac_weighted_hamming(fp, fn, n_true, d, gamma: Fraction):
    fn_term = gamma * Fraction(fn, n_true) if n_true else Fraction(0)
    fp_term = (1 - gamma) * Fraction(fp, d - n_true) if n_true != d else Fraction(0)
    return 1 - fn_term - fp_term


def frac_tversky(tp, fp, fn, alpha: Fraction, beta: Fraction):
    if tp == fp == fn == 0:
        return Fraction(1)
    return Fraction(tp) / (tp + alpha * fp + beta * fn)


def mask_of(bits) -> BinaryMask:
    bits = list(bits)
    return BinaryMask((len(bits), 1, 1), np.array(bits, dtype=np.uint8))


def prob_of(values) -> ProbMap:
    values = list(values)
    return ProbMap((len(values), 1, 1), np.array(values, dtype=np.float64))


def all_masks(d):
    """All 2**d binary masks of length d, lexicographic pattern order."""
    return [mask_of([(i >> (d - 1 - j)) & 1 for j in range(d)]) for i in range(1 << d)]


def max_rel_grad_error(spec, y: BinaryMask, p: ProbMap, h: float = 1e-6) -> float:
    """Worst per-coordinate deviation between the analytic gradient and
    central finite differences, relative with a unit floor."""
    analytic = eval_loss(spec, y, p).gradient
    fd = finite_diff_gradient(spec, y, p, h)
    denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(fd)))
    return float(np.max(np.abs(analytic - fd) / denom))


def random_instance(rng, d, p_lo=0.05, p_hi=0.95):
    """A random (mask, probabilities) pair with p away from 0/1."""
    y = mask_of(rng.integers(0, 2, size=d))
    p = prob_of(rng.uniform(p_lo, p_hi, size=d))
    return y, p


def lovasz_has_near_ties(y: BinaryMask, p: ProbMap, tol: float = 1e-4) -> bool:
    """Whether two per-pixel errors are within tol (a sort-order kink)."""
    m = np.where(y.data > 0, 1.0 - p.data, p.data)
    ms = np.sort(m)
    return bool(ms.size > 1 and np.min(np.diff(ms)) < tol)
