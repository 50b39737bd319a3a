"""Hypothesis strategies for sequences and symbols."""

from __future__ import annotations

import cmath
import math

from hypothesis import strategies as st

from shiftlab.seqcore import GeomSequence, GeomTerm


def cplx(radius: float = 1.0):
    return st.builds(lambda r, t: r * cmath.exp(1j * t),
                     st.floats(0, radius), st.floats(0, 2 * math.pi))


def ratios(unimodular: bool = True, max_mod: float = 0.9):
    dec = st.builds(lambda r, t: r * cmath.exp(1j * t),
                    st.floats(0.05, max_mod), st.floats(0, 2 * math.pi))
    if not unimodular:
        return dec
    uni = st.sampled_from([1.0, -1.0, 1j, -1j]) | st.floats(0, 2 * math.pi).map(lambda t: cmath.exp(1j * t))
    return dec | uni


@st.composite
def terms(draw, unimodular=True, max_degree=2):
    rho = draw(ratios(unimodular))
    if abs(abs(rho) - 1) < 1e-12:
        return GeomTerm(draw(cplx(2.0)), rho)
    deg = draw(st.integers(0, max_degree))
    poly = draw(st.lists(cplx(2.0), min_size=deg + 1, max_size=deg + 1))
    return GeomTerm.from_poly(rho, poly)


@st.composite
def sequences(draw, unimodular=True, max_head=6, max_terms=2, max_degree=2):
    head = draw(st.lists(cplx(3.0), max_size=max_head))
    tail = draw(st.lists(terms(unimodular, max_degree), max_size=max_terms))
    anchor = draw(st.integers(0, len(head))) if tail else 0
    return GeomSequence(head, tail, anchor)


@st.composite
def finite_support(draw, max_len=12, radius=1.0):
    return GeomSequence(draw(st.lists(cplx(radius), min_size=1, max_size=max_len)))
