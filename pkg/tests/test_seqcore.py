import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab.seqcore import (
    CertifiedInterval,
    GeomSequence,
    GeomTerm,
    add,
    backward_shift,
    basis,
    binomial_coeffs_from_values,
    binomial_poly_eval,
    constant,
    in_c0,
    quotient_seminorm,
    rebase,
    right_shift,
    scale,
    sub,
    sup_norm,
    zero,
)
from strategies import cplx, sequences

WINDOW = 300


def test_interval_basics():
    iv = CertifiedInterval(1.0, 2.0)
    assert iv.contains(1.5) and not iv.contains(2.5)
    assert iv.width == 1.0
    assert CertifiedInterval.exact(3.0).is_exact
    assert CertifiedInterval(0.0, math.inf).to_list() == [0.0, None]
    assert CertifiedInterval.from_list([1, None]).upper == math.inf
    with pytest.raises(ValueError):
        CertifiedInterval(2.0, 1.0)


def test_basis_and_constant():
    assert list(basis(3).values(5)) == [0, 0, 1, 0, 0]
    assert np.all(constant(2.0).values(10) == 2.0)
    assert zero().is_zero()


def test_tail_evaluation_uses_absolute_index():
    x = GeomSequence([5.0], [GeomTerm(1.0, 0.5)])
    # anchor 0: x_n = 0.5**n beyond the head
    assert x.at(1) == 5.0
    assert x.at(3) == 0.125


def test_anchor_shifts_the_tail():
    x = GeomSequence([1.0], [GeomTerm(1.0, 0.5)], anchor=1)
    assert x.at(2) == 0.5 and x.at(3) == 0.25


def test_normalisation_merges_equal_ratios():
    x = GeomSequence([], [GeomTerm(1.0, 0.5), GeomTerm(2.0, 0.5)])
    assert len(x.tail) == 1 and x.tail[0].coeff == 3.0


def test_cancelling_terms_vanish():
    x = GeomSequence([], [GeomTerm(1.0, 0.5), GeomTerm(-1.0, 0.5)])
    assert x.is_zero()


def test_unbounded_rejected_by_default():
    with pytest.raises(ValueError):
        GeomSequence([], [GeomTerm(1.0, 2.0)])
    x = GeomSequence([], [GeomTerm(1.0, 2.0)], allow_unbounded=True)
    assert not x.is_bounded


def test_anchor_outside_range_rejected():
    with pytest.raises(ValueError):
        GeomSequence([1.0], [GeomTerm(1.0, 0.5)], anchor=3)


def test_polynomial_term_values():
    t = GeomTerm.from_poly(0.5, [1.0, 2.0])
    # 0.5**m (1 + 2m)
    for m in range(6):
        assert t.value(m) == pytest.approx(0.5**m * (1 + 2 * m))


def test_binomial_round_trip():
    vals = [1.0, 4.0, 9.0, 16.0]
    poly = binomial_coeffs_from_values(vals)
    for m, v in enumerate(vals):
        assert binomial_poly_eval(poly, m) == pytest.approx(v)
    assert binomial_poly_eval(poly, 5) == pytest.approx(36.0)


def test_json_fields():
    x = GeomSequence([1.0, 2j], [GeomTerm(1.0, 0.5)])
    d = x.to_dict()
    assert d["head"] == [[1.0, 0.0], [0.0, 2.0]]
    assert d["tail"] == [{"coeff": [1.0, 0.0], "ratio": [0.5, 0.0]}]
    assert GeomSequence.from_dict(d).values(10).tolist() == x.values(10).tolist()


def test_sup_norm_exact_cases():
    assert sup_norm(basis(4)) == CertifiedInterval.exact(1.0)
    assert sup_norm(constant(-2.0)) == CertifiedInterval.exact(2.0)
    assert sup_norm(GeomSequence([], [GeomTerm(1.0, 1 / 3)])) == CertifiedInterval.exact(1 / 3)


def test_sup_norm_of_two_rotations():
    x = GeomSequence([], [GeomTerm(1.0, 1j), GeomTerm(1.0, -1j)])
    assert sup_norm(x).to_list() == [2.0, 2.0]
    q = quotient_seminorm(x)
    assert q.lower == pytest.approx(math.sqrt(2)) and q.upper == 2.0


def test_quotient_seminorm_cases():
    assert quotient_seminorm(basis(2)).to_list() == [0.0, 0.0]
    assert quotient_seminorm(GeomSequence([9.0], [GeomTerm(0.5j, -1.0)])).to_list() == [0.5, 0.5]
    assert quotient_seminorm(GeomSequence([], [GeomTerm(1.0, 0.9)])).to_list() == [0.0, 0.0]


def test_in_c0():
    assert in_c0(basis(1))
    assert in_c0(GeomSequence([], [GeomTerm.from_poly(0.9, [0, 1])]))
    assert not in_c0(constant(1.0))


def test_shifts():
    x = GeomSequence([1.0, 2.0], [GeomTerm(1.0, 0.5)])
    assert np.allclose(backward_shift(x).values(10), x.values(11)[1:])
    assert np.allclose(right_shift(x).values(10), np.concatenate([[0], x.values(9)]))


@settings(max_examples=80, deadline=None)
@given(sequences(), sequences())
def test_add_sub_are_pointwise(x, y):
    ref_x, ref_y = x.values(WINDOW), y.values(WINDOW)
    assert np.allclose(add(x, y).values(WINDOW), ref_x + ref_y, atol=1e-9)
    assert np.allclose(sub(x, y).values(WINDOW), ref_x - ref_y, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(sequences(), cplx(3.0))
def test_scale_is_pointwise(x, a):
    assert np.allclose(scale(a, x).values(WINDOW), a * x.values(WINDOW), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(sequences(), st.integers(0, 8))
def test_rebase_preserves_values(x, extra):
    y = rebase(x, x.anchor + extra)
    assert np.allclose(y.values(WINDOW), x.values(WINDOW), atol=1e-9)


@settings(max_examples=80, deadline=None)
@given(sequences())
def test_sup_norm_brackets_brute_force(x):
    iv = sup_norm(x)
    brute = float(np.max(np.abs(x.values(20000))))
    assert iv.lower <= brute * (1 + 1e-12) + 1e-12
    assert brute <= iv.upper * (1 + 1e-12) + 1e-12


@settings(max_examples=60, deadline=None)
@given(sequences())
def test_json_round_trip(x):
    y = GeomSequence.from_dict(x.to_dict())
    assert np.array_equal(y.values(50), x.values(50))
