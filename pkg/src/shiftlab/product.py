"""``T = lam B o P o S`` on l-infinity with a non-separable set of J^mix vectors.

``S`` is the odd/even deinterleaving ``x -> (x_1, x_3, ...) (+) (x_2, x_4, ...)``
and ``P`` keeps the first summand.  Both ``S`` and its inverse are isometric,
so the construction works for every ``|lam| > 1``.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass

import numpy as np

from .seqcore import (
    GeomSequence,
    GeomTerm,
    _build,
    binomial_coeffs_from_values,
    binomial_poly_eval,
    constant,
    scale,
    sub,
    sup_norm,
    zero,
)
from .solvers import (
    MixingCertificate,
    RegimeError,
    _entry,
    transport_certificate,
)
from .symcalc import apply_backward

__all__ = [
    "ProductOperator",
    "split",
    "merge",
    "product_apply",
    "product_right_inverse",
    "product_chain",
    "separated_family",
    "distance_matrix",
]


@dataclass(frozen=True)
class ProductOperator:
    lam: complex
    split_convention: str = "odd-to-first"

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        if abs(self.lam) <= 1:
            raise RegimeError(f"need |lam| > 1 (||S^-1|| = 1), got {abs(self.lam):g}")

    @property
    def q(self) -> float:
        return 1.0 / abs(self.lam)

    def descriptor(self) -> dict:
        return {"kind": "product", "lambda": [self.lam.real, self.lam.imag],
                "split_convention": self.split_convention}


def _subsample(x: GeomSequence, parity: int) -> GeomSequence:
    """``u_j = x_{2j - parity}`` (parity 1: odd entries, 0: even)."""
    N, a = x.N, x.anchor
    h = N // 2 + 1 if parity else (N + 1) // 2
    b = h
    vals = x.values(2 * h) if h else np.zeros(0, dtype=complex)
    head = vals[0::2] if parity else vals[1::2]
    e = 2 * b - parity - a
    tail = []
    for t in x.tail:
        d = len(t.poly) - 1
        # rho**(2m'+e) P(2m'+e) = (rho**2)**m' [rho**e P(2m'+e)]
        vals = [t.ratio**e * binomial_poly_eval(t.poly, 2 * k + e) for k in range(d + 1)]
        tail.append(GeomTerm.from_poly(t.ratio**2, binomial_coeffs_from_values(vals)))
    return _build(head, tail, b)


def split(x: GeomSequence) -> tuple[GeomSequence, GeomSequence]:
    """``S x``: odd-indexed and even-indexed subsequences."""
    return _subsample(x, 1), _subsample(x, 0)


def _spread(u: GeomSequence, parity: int) -> tuple[list, int]:
    """Tail terms and anchor of ``u`` placed on positions ``2j - parity``."""
    b = u.anchor
    anchor = 2 * b - parity
    # u tail at n = 2j - parity: sigma**(j-b) Q(j-b), j - b = (n - anchor)/2 + ... ;
    # with n' = n - (2b - parity): sigma**(n'/2) Q(n'/2) at even n', 0 at odd n'
    tail = []
    for t in u.tail:
        r = cmath.sqrt(t.ratio)
        d = len(t.poly) - 1
        vals = [binomial_poly_eval(t.poly, k / 2) / 2 for k in range(d + 1)]
        half = binomial_coeffs_from_values(vals)
        tail.append(GeomTerm.from_poly(r, half))
        tail.append(GeomTerm.from_poly(-r, half))
    return tail, anchor


def merge(u: GeomSequence, v: GeomSequence) -> GeomSequence:
    """``S^{-1}(u (+) v)``: interleave ``u`` on odd and ``v`` on even positions."""
    hu = max(u.N, u.anchor)
    hv = max(v.N, v.anchor)
    L = max(2 * hu, 2 * hv)
    head = np.zeros(L, dtype=complex)
    if L:
        head[0::2] = u.values(L // 2)
        head[1::2] = v.values(L // 2)
    tu, au = _spread(u, 1)
    tv, av = _spread(v, 0)
    anchor = max(au, av) if (tu or tv) else 0
    from .seqcore import _rebase_term

    tail = [_rebase_term(t, anchor - au) for t in tu] + [_rebase_term(t, anchor - av) for t in tv]
    return _build(head, tail, anchor)


def product_apply(op: ProductOperator, x: GeomSequence) -> GeomSequence:
    """``T x = lam B (odd part of x)``."""
    odd, _ = split(x)
    return apply_backward(odd, 1, op.lam)


def product_right_inverse(op: ProductOperator, y: GeomSequence) -> GeomSequence:
    """``z = S^{-1}((0, y/lam) (+) 0)`` with ``T z = y`` and ``||z|| = ||y|| / |lam|``."""
    from .seqcore import right_shift

    x1 = scale(1 / op.lam, right_shift(y))
    return merge(x1, zero())


def product_chain(op: ProductOperator, y: GeomSequence, n_max: int,
                  base_point: GeomSequence | None = None) -> MixingCertificate:
    """``T**n z_n = y`` with ``||z_n|| <= q**n ||y||``, transported to a kernel vector.

    The default base point is ``S^{-1}(0 (+) (1, 1, 1, ...))``.
    """
    entries = []
    z = y
    for n in range(1, n_max + 1):
        z = product_right_inverse(op, z)
        entries.append(_entry(n, z))
    cert = MixingCertificate(op.descriptor(), GeomSequence(), y, tuple(entries),
                             op.q, sup_norm(y).upper)
    if base_point is None:
        base_point = merge(zero(), constant(1.0))
    if not base_point.is_zero():
        cert = transport_certificate(cert, base_point)
    return cert


def separated_family(k: int) -> list[GeomSequence]:
    """``2**k`` kernel vectors ``S^{-1}(0 (+) v_b)``, ``v_b`` 0/1 heads of length ``k``."""
    if not 1 <= k <= 16:
        raise ValueError("k must lie in [1, 16]")
    family = []
    for bits in itertools.product((0, 1), repeat=k):
        family.append(merge(zero(), GeomSequence(list(bits))))
    return family


def distance_matrix(family: list[GeomSequence]) -> np.ndarray:
    """Pairwise ``||f_i - f_j||`` (upper ends of the certified intervals)."""
    n = len(family)
    out = np.zeros((n, n))
    heads = [f.values(max(g.N for g in family) or 1) for f in family]
    if all(not f.tail for f in family):
        arr = np.asarray(heads)
        for i in range(n):
            out[i] = np.max(np.abs(arr - arr[i]), axis=1)
        return out
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = sup_norm(sub(family[i], family[j])).upper
    return out
