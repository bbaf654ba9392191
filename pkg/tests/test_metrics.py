import math
from fractions import Fraction

import numpy as np
import pytest

from segloss import metrics
from segloss.errors import NonPositiveWeight, OutOfRange
from segloss.masks import BinaryMask
from util import (
    all_masks,
    frac_dice,
    frac_hamming,
    frac_jaccard,
    frac_tversky,
    frac_weighted_hamming,
    mask_of,
    set_counts,
)

Y = mask_of([1, 1, 0, 0])
YH = mask_of([1, 0, 1, 0])


def test_dice_worked_pair():
    assert metrics.dice(Y, YH) == 0.5


def test_dice_identity_and_empty_conventions():
    m = mask_of([1, 0, 1])
    assert metrics.dice(m, m) == 1.0
    empty = mask_of([0, 0, 0])
    assert metrics.dice(empty, empty) == 1.0
    assert metrics.dice(empty, m) == 0.0
    assert metrics.dice(m, empty) == 0.0


def test_jaccard_worked_pair_and_conversion():
    j = metrics.jaccard(Y, YH)
    assert j == pytest.approx(1 / 3, abs=1e-15)
    d = metrics.dice(Y, YH)
    assert metrics.dice_jaccard_convert(d, "d2j") == pytest.approx(j, abs=1e-15)


def test_jaccard_disjoint():
    assert metrics.jaccard(mask_of([1, 0]), mask_of([0, 1])) == 0.0


def test_hamming_worked_pair_identity_complement():
    assert metrics.hamming(Y, YH) == 0.5
    assert metrics.hamming(Y, Y) == 1.0
    comp = mask_of([0, 0, 1, 1])
    assert metrics.hamming(Y, comp) == 0.0


def test_weighted_hamming_matches_plain_at_class_fraction():
    y = mask_of([1, 0, 0, 0])
    yh = mask_of([0, 1, 0, 0])
    assert metrics.weighted_hamming(y, yh, 0.25) == pytest.approx(0.5, abs=1e-15)
    assert metrics.hamming(y, yh) == 0.5


def test_weighted_hamming_identity_and_gamma_one():
    assert metrics.weighted_hamming(Y, Y, 0.7) == 1.0
    assert metrics.weighted_hamming(mask_of([1, 0]), mask_of([1, 1]), 1.0) == 1.0


def test_weighted_hamming_gamma_range():
    with pytest.raises(OutOfRange):
        metrics.weighted_hamming(Y, YH, 1.5)


def test_tversky_interpolates_dice_and_jaccard():
    assert metrics.tversky(Y, YH, 0.5, 0.5) == metrics.dice(Y, YH)
    assert metrics.tversky(Y, YH, 1.0, 1.0) == metrics.jaccard(Y, YH)
    assert metrics.tversky(Y, YH, 0.3, 0.7) == pytest.approx(0.5, abs=1e-15)


def test_tversky_weight_validation():
    with pytest.raises(NonPositiveWeight):
        metrics.tversky(Y, YH, 0.0, 0.5)


def test_dice_jaccard_convert_fixed_points_and_round_trip():
    assert metrics.dice_jaccard_convert(1.0, "d2j") == 1.0
    assert metrics.dice_jaccard_convert(0.0, "d2j") == 0.0
    assert metrics.dice_jaccard_convert(0.5, "d2j") == pytest.approx(1 / 3, abs=1e-16)
    v = 0.37
    rt = metrics.dice_jaccard_convert(metrics.dice_jaccard_convert(v, "j2d"), "d2j")
    assert rt == pytest.approx(v, abs=1e-15)
    with pytest.raises(OutOfRange):
        metrics.dice_jaccard_convert(0.5, "sideways")


def test_exhaustive_small_d_against_fraction_oracle():
    gammas = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1)]
    for d in (1, 2, 3, 4):
        for y in all_masks(d):
            for yh in all_masks(d):
                tp, fp, fn, tn = set_counts(y.data, yh.data)
                assert metrics.dice(y, yh) == pytest.approx(float(frac_dice(tp, fp, fn)), abs=1e-14)
                assert metrics.jaccard(y, yh) == pytest.approx(float(frac_jaccard(tp, fp, fn)), abs=1e-14)
                assert metrics.hamming(y, yh) == pytest.approx(float(frac_hamming(fp, fn, d)), abs=1e-14)
                for g in gammas:
                    assert metrics.weighted_hamming(y, yh, float(g)) == pytest.approx(
                        float(frac_weighted_hamming(fp, fn, tp + fn, d, g)), abs=1e-14
                    )
                assert metrics.tversky(y, yh, 0.25, 2.0) == pytest.approx(
                    float(frac_tversky(tp, fp, fn, Fraction(1, 4), Fraction(2))), abs=1e-14
                )


def test_exhaustive_invariants_small_d():
    for d in (2, 3, 5):
        for y in all_masks(d):
            for yh in all_masks(d):
                dv = metrics.dice(y, yh)
                jv = metrics.jaccard(y, yh)
                if y.count() and yh.count():
                    assert jv <= dv
                assert metrics.tversky(y, yh, 0.5, 0.5) == dv
                assert metrics.tversky(y, yh, 1.0, 1.0) == jv
                acc = metrics.auxiliary_metric("accuracy", y, yh).value
                assert metrics.hamming(y, yh) == pytest.approx(acc, abs=1e-15)
                if 0 < y.count() < d:
                    assert metrics.weighted_hamming(y, yh, y.count() / d) == pytest.approx(
                        metrics.hamming(y, yh), abs=1e-12
                    )
                assert jv == pytest.approx(metrics.dice_jaccard_convert(dv, "d2j"), abs=1e-12)
                # symmetries
                assert metrics.dice(yh, y) == dv
                assert metrics.jaccard(yh, y) == jv
                assert metrics.tversky(y, yh, 0.3, 0.7) == pytest.approx(
                    metrics.tversky(yh, y, 0.7, 0.3), abs=1e-15
                )


def test_fbeta_one_equals_dice():
    rng = np.random.default_rng(4)
    for _ in range(20):
        y = mask_of(rng.integers(0, 2, size=9))
        yh = mask_of(rng.integers(0, 2, size=9))
        f1 = metrics.auxiliary_metric("fbeta", y, yh, b=1.0)
        assert f1.value == pytest.approx(metrics.dice(y, yh), abs=1e-15)


def test_fbeta_frozen_values():
    # tp=2, fp=0, fn=2
    y = mask_of([1, 1, 1, 1, 0])
    yh = mask_of([1, 1, 0, 0, 0])
    f05 = metrics.auxiliary_metric("fbeta", y, yh, b=0.5).value
    f20 = metrics.auxiliary_metric("fbeta", y, yh, b=2.0).value
    assert f05 == pytest.approx(2.5 / 3, abs=1e-15)
    assert f20 == pytest.approx(10 / 18, abs=1e-15)
    with pytest.raises(OutOfRange):
        metrics.auxiliary_metric("fbeta", y, yh)


def test_hausdorff_three_four_five():
    a = np.zeros((5, 5), dtype=np.uint8)
    a[0, 0] = 1  # (x=0, y=0)
    b = np.zeros((5, 5), dtype=np.uint8)
    b[4, 3] = 1  # (x=3, y=4)
    hd = metrics.auxiliary_metric("hausdorff", BinaryMask.from_array(a), BinaryMask.from_array(b))
    assert hd.defined and hd.value == pytest.approx(5.0, abs=1e-12)


def test_hausdorff_identity_and_subset():
    a = np.zeros((4, 4), dtype=np.uint8)
    a[1:3, 1:3] = 1
    ma = BinaryMask.from_array(a)
    assert metrics.auxiliary_metric("hausdorff", ma, ma).value == 0.0
    b = a.copy()
    b[1, 1] = 0
    mb = BinaryMask.from_array(b)
    # dropped corner sits one pixel from its nearest remaining neighbour
    v = metrics.auxiliary_metric("hausdorff", ma, mb).value
    assert v == pytest.approx(1.0, abs=1e-12)


def test_hausdorff_undefined_when_side_empty():
    empty = mask_of([0, 0, 0, 0])
    full = mask_of([1, 1, 0, 0])
    r = metrics.auxiliary_metric("hausdorff", empty, full)
    assert not r.defined and math.isnan(r.value)


def test_avd_percent_and_undefined():
    y = mask_of([1, 1, 0, 0, 0])
    yh = mask_of([1, 1, 1, 0, 0])
    r = metrics.auxiliary_metric("avd", y, yh)
    assert r.defined and r.value == pytest.approx(50.0, abs=1e-12)
    r2 = metrics.auxiliary_metric("avd", mask_of([0, 0]), mask_of([1, 0]))
    assert not r2.defined


def test_auxiliary_unknown_kind():
    with pytest.raises(OutOfRange):
        metrics.auxiliary_metric("perimeter", Y, YH)
