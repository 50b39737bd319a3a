import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab.obstructions import (
    amix_membership,
    circle_eigenvector,
    min_norm_lower_bound,
    minimal_enclosing_circle,
    range_witness,
    resolvent_solve,
    spectral_circle_distance,
    two_point_lower_bound,
)
from shiftlab.seqcore import GeomSequence, GeomTerm, add, basis, constant, in_c0, quotient_seminorm, sup_norm
from shiftlab.solvers import RegimeError, kernel_vector
from shiftlab.symcalc import apply_symbol, polynomial
from oracles import minimax_numeric
from strategies import cplx, finite_support, sequences


def unit(t):
    return cmath.exp(1j * t)


def test_range_witness_values():
    assert np.allclose(range_witness(-1).values(4), [1, 1, 1, 1])
    assert np.allclose(range_witness(1).values(4), [-1, 1, -1, 1])
    assert np.allclose(range_witness(1j).values(4), [1j**n for n in range(1, 5)])
    with pytest.raises(ValueError):
        range_witness(1.5)


def test_closed_form_minimax():
    rep = min_norm_lower_bound(-1, range_witness(-1), 101)
    assert rep.min_norm.to_list() == [50.0, 50.0]
    assert rep.floor == 25.0 and rep.floor_holds
    assert rep.x1 == 50.0


def test_zero_target_has_zero_minimum():
    assert min_norm_lower_bound(-1, GeomSequence(), 21).min_norm.to_list() == [0.0, 0.0]


@pytest.mark.parametrize("N", [21, 51, 101])
def test_witness_floor_on_roots_of_unity(N):
    for k in range(32):
        lam = unit(2 * math.pi * k / 32)
        rep = min_norm_lower_bound(lam, range_witness(lam), N)
        assert rep.min_norm.lower >= (N - 1) / 4 - 1e-6


def test_enclosing_circle_small_cases():
    c, r, _ = minimal_enclosing_circle([0, 2, 1 + 1j])
    assert r == pytest.approx(1.0) and c == pytest.approx(1.0)
    c, r, _ = minimal_enclosing_circle([0, 1, 2, 3])
    assert r == pytest.approx(1.5)
    # equilateral triangle: circumradius 1/sqrt(3)
    _, r, _ = minimal_enclosing_circle([0, 1, 0.5 + 0.5j * math.sqrt(3)])
    assert r == pytest.approx(1 / math.sqrt(3))


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * math.pi), finite_support(12, 2.0), st.integers(3, 40))
def test_minimax_agrees_with_numerical_oracle(t, w, N):
    lam = unit(t)
    rep = min_norm_lower_bound(lam, w, N)
    from shiftlab.solvers import preimage

    A = preimage(lam, w, 0).values(N)
    c = -A / np.array([(-1 / lam) ** k for k in range(N)])
    nm, dual = minimax_numeric(c)
    assert rep.min_norm.lower <= nm + 1e-7
    assert rep.min_norm.upper <= nm + 1e-7
    assert dual <= rep.min_norm.lower + 1e-9
    assert rep.dual_lower == pytest.approx(dual, abs=1e-9)


def test_eigenvectors():
    assert np.allclose(circle_eigenvector(0).values(4), [1, 1, 1, 1])
    assert np.array_equal(circle_eigenvector(math.pi).values(4), [1, -1, 1, -1])
    assert np.array_equal(circle_eigenvector(math.pi / 2).values(4), [1, 1j, -1, -1j])
    for k in range(64):
        x = circle_eigenvector(2 * math.pi * k / 64)
        mu = x.tail[0].ratio
        assert sup_norm(apply_symbol(polynomial(-mu, 1), x)[0]).to_list() == [0.0, 0.0]
        assert quotient_seminorm(x).to_list() == [1.0, 1.0]


def test_resolvent_examples():
    y = GeomSequence([1.0, 2.0, 3.0])
    assert np.allclose(resolvent_solve(0, y).values(5), [0, 1, 2, 3, 0])
    assert np.allclose(resolvent_solve(0.5, basis(1)).values(5), [0, 1, 0.5, 0.25, 0.125])
    assert resolvent_solve(0.5, GeomSequence()).is_zero()
    with pytest.raises(ValueError):
        resolvent_solve(1.0, basis(1))


def test_resonant_resolvent_is_exact():
    mu = 0.5j
    y = GeomSequence([], [GeomTerm(1.0, mu)])
    x = resolvent_solve(mu, y)
    assert x.max_degree == 1
    back = apply_symbol(polynomial(-mu, 1), x)[0]
    assert np.allclose(back.values(100), y.values(100), atol=1e-12)


mus = st.builds(lambda r, t: r * cmath.exp(1j * t), st.floats(0, 0.95), st.floats(0, 2 * math.pi))


@settings(max_examples=100, deadline=None)
@given(mus, sequences())
def test_resolvent_identity_and_bound(mu, y):
    x = resolvent_solve(mu, y)
    back = apply_symbol(polynomial(-mu, 1), x)[0]
    assert np.allclose(back.values(200), y.values(200), atol=1e-10)
    if y.max_degree == 0:
        assert sup_norm(x).upper <= sup_norm(y).upper / (1 - abs(mu)) + 1e-9


@settings(max_examples=60, deadline=None)
@given(mus.filter(lambda m: abs(m) <= 0.9), sequences(), st.floats(0, 2 * math.pi), cplx(2.0))
def test_injectivity_on_the_quotient(mu, x, t, c):
    # force a non-null unimodular component
    x = add(x, GeomSequence([], [GeomTerm(c + 0.5, unit(t))]))
    if in_c0(x):
        return
    assert not in_c0(apply_symbol(polynomial(-mu, 1), x)[0])


def test_spectral_distance():
    assert spectral_circle_distance(3) == 1.0
    assert spectral_circle_distance(2) == 0.0
    assert spectral_circle_distance(0) == 0.0
    for r in np.linspace(0, 4, 1000):
        lam = r * unit(0.3 + r)
        assert spectral_circle_distance(lam) == pytest.approx(max(r - 2, 0), abs=1e-9)


def test_spectral_distance_against_dense_circle():
    for lam in [0.5, 1.7j, 2.5, -3.2 + 1j]:
        t = np.linspace(0, 2 * np.pi, 200001)
        brute = float(np.min(np.abs(np.abs(1 + lam * np.exp(1j * t)) - 1)))
        d = spectral_circle_distance(lam)
        # sampling overestimates the minimum by at most |lam| * grid spacing
        assert d <= brute + 1e-12
        assert brute - d <= abs(lam) * (t[1] - t[0])


def test_amix_membership():
    assert amix_membership(3, basis(1))
    assert not amix_membership(3, constant(1.0))
    assert amix_membership(3, kernel_vector(3, 1))
    with pytest.raises(RegimeError, match="empty"):
        amix_membership(2, basis(1))
