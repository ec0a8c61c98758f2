"""Scaled 2x2 arithmetic: frozen values and algebraic invariants."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import example_checks as ec
from fuchsianwalk import sl2
from fuchsianwalk.errors import DomainError, NumericFailure
from fuchsianwalk.sl2 import ElementClass, Mat2, ScaledMat


def test_reference_products():
    ec.check_mul_identity_pair()
    ec.check_mul_diagonal_powers()
    ec.check_mul_shear_product()


def test_reference_observables():
    ec.check_log_op_norm_values()
    ec.check_signed_log_trace_values()
    ec.check_classify_values()
    ec.check_geom_length_values()


def test_geom_length_requires_hyperbolic():
    with pytest.raises(DomainError):
        sl2.geom_length(sl2.from_mat2(Mat2(1.0, 1.0, 0.0, 1.0)))


def test_from_mat2_rejects_nonfinite():
    with pytest.raises(NumericFailure):
        sl2.from_mat2(Mat2(math.inf, 0.0, 0.0, 1.0))
    with pytest.raises(NumericFailure):
        sl2.from_mat2(Mat2(math.nan, 0.0, 0.0, 1.0))


def test_restore_overflow_raises():
    big = ScaledMat(Mat2(0.5, 0.0, 0.0, 0.5), 1e4)
    with pytest.raises(NumericFailure):
        sl2.restore(big)


# random SL2 elements built from shears and a rotation-like mix; entries stay
# moderate so exact checks are meaningful
def _random_sl2(draw_floats):
    t, u, v = draw_floats
    x = Mat2(1.0, t, 0.0, 1.0)
    y = Mat2(1.0, 0.0, u, 1.0)
    z = Mat2(math.cos(v), -math.sin(v), math.sin(v), math.cos(v))
    return sl2.mat_mul(sl2.mat_mul(x, y), z)


small_floats = st.tuples(
    st.floats(-3.0, 3.0, allow_nan=False),
    st.floats(-3.0, 3.0, allow_nan=False),
    st.floats(-3.0, 3.0, allow_nan=False),
)


@given(small_floats)
def test_random_elements_keep_det_one(params):
    m = _random_sl2(params)
    assert abs(sl2.det(m) - 1.0) <= 1e-9


@settings(max_examples=60)
@given(st.lists(small_floats, min_size=1, max_size=30))
def test_long_products_keep_det_one(plist):
    acc = sl2.identity()
    for params in plist:
        acc = sl2.mul(sl2.from_mat2(_random_sl2(params)), acc)
    m, s = acc
    # det(e^s m) = e^{2s} det(m) must still be 1
    log_det = 2.0 * s + math.log(abs(sl2.det(m)))
    assert abs(log_det) <= 30 * 1e-9


@given(small_floats, small_floats)
def test_scale_matches_direct_product(p, q):
    x, y = _random_sl2(p), _random_sl2(q)
    direct = sl2.mat_mul(x, y)
    scaled = sl2.mul(sl2.from_mat2(x), sl2.from_mat2(y))
    want = 0.5 * math.log(
        sum(e * e for e in direct))  # log Frobenius of the true product
    got = scaled.s + math.log(sl2.frobenius(scaled.m))
    assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


@given(small_floats, small_floats)
def test_log_norm_submultiplicative(p, q):
    x = sl2.from_mat2(_random_sl2(p))
    y = sl2.from_mat2(_random_sl2(q))
    prod = sl2.mul(x, y)
    bound = sl2.log_op_norm(x) + sl2.log_op_norm(y)
    assert sl2.log_op_norm(prod) <= bound + 1e-9


@given(small_floats)
def test_log_norm_nonnegative(p):
    # ||g|| >= 1 for any det-1 matrix
    assert sl2.log_op_norm(sl2.from_mat2(_random_sl2(p))) >= -1e-12


@given(small_floats, small_floats)
def test_geom_length_conjugation_invariant(p, q):
    g = _random_sl2(p)
    if abs(sl2.trace(g)) <= 2.0 + 1e-6:
        return
    h = _random_sl2(q)
    conj = sl2.mat_mul(sl2.mat_mul(h, g), sl2.sl2_inverse(h))
    a = sl2.geom_length(sl2.from_mat2(g))
    b = sl2.geom_length(sl2.from_mat2(conj))
    assert abs(a - b) <= 1e-6 * max(1.0, a)


def _trace_carrier(logabs):
    # diagonal-free stand-in whose only meaningful observable is the trace
    return ScaledMat(Mat2(0.5, 0.0, 0.0, 0.0), logabs - math.log(0.5))


def test_geom_length_agrees_with_direct_form():
    # in the region where arccosh(e^L/2) is representable the asymptotic
    # expression must reproduce it; checks the branch switch introduces no jump
    for logabs in (2.0, 5.0, 12.0, 25.0, 29.0, 29.999999):
        ell = sl2.geom_length(_trace_carrier(logabs))
        want = 2.0 * math.acosh(math.exp(logabs) / 2.0)
        assert abs(ell - want) <= 1e-12 * want
    below = sl2.geom_length(_trace_carrier(30.0 - 1e-9))
    above = sl2.geom_length(_trace_carrier(30.0 + 1e-9))
    assert abs(above - below) <= 1e-7


def test_geom_length_huge_trace_no_overflow():
    # far past float range for e^L itself; 2*arccosh(e^L/2) -> 2L
    ell = sl2.geom_length(_trace_carrier(5000.0))
    assert abs(ell - 10000.0) <= 1e-9 * ell


def test_classification_tolerance_band():
    # trace within the band around 2 counts as parabolic even when inexact
    eps = 1e-12
    near = sl2.from_mat2(Mat2(1.0 + eps, 1.0, 0.0, 1.0 / (1.0 + eps)))
    assert sl2.classify(near) is ElementClass.PARABOLIC
    clear = sl2.from_mat2(Mat2(2.5, 0.0, 0.0, 0.4))
    assert sl2.classify(clear) is ElementClass.HYPERBOLIC


def test_identity_detected_after_scaling():
    g = sl2.identity()
    for _ in range(12):
        g = sl2.mul(g, sl2.identity())
    assert sl2.classify(g) is ElementClass.IDENTITY
    assert sl2.classify(ScaledMat(Mat2(-0.5, 0.0, 0.0, -0.5), math.log(2.0) / 2.0 + math.log(2.0) / 2.0)) is ElementClass.IDENTITY


def test_canonical_key_sign_convention():
    m = Mat2(1.0, 2.0, 0.0, 1.0)
    neg = Mat2(-1.0, -2.0, 0.0, -1.0)
    assert sl2.canonical_key(m) == sl2.canonical_key(neg)
