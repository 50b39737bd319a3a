"""Bounded complex sequences as a finite head plus quasi-geometric tails.

A :class:`GeomSequence` represents ``x = (x_1, x_2, ...)`` by

* ``head``: explicit values ``x_1 .. x_N``;
* ``tail``: terms ``(ratio, poly)`` with, for every ``n > N``,
  ``x_n = sum_j ratio_j**m * sum_i poly_j[i] * C(m, i)``, ``m = n - anchor``.

With ``anchor = 0`` and constant polynomials this is the plain geometric form
``x_n = sum_j c_j * rho_j**n``.  The polynomial factor, kept in the binomial
basis ``C(m, i)``, is needed because iterated preimages under ``I + lam*B``
resonate with the kernel ratio ``-1/lam`` and produce ``n * rho**n`` terms.
The anchor keeps coefficients O(1) when heads grow long.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import binom, gammaln

__all__ = [
    "UNIT_TOL",
    "DEFAULT_HORIZON",
    "CertifiedInterval",
    "GeomTerm",
    "GeomSequence",
    "evaluate",
    "add",
    "scale",
    "sub",
    "sup_norm",
    "quotient_seminorm",
    "in_c0",
    "basis",
    "constant",
    "zero",
    "backward_shift",
    "right_shift",
    "rebase",
    "materialize",
    "binomial_coeffs_from_values",
    "binomial_poly_eval",
]

#: ratios with ``abs(abs(rho) - 1) <= UNIT_TOL`` are treated as unimodular
UNIT_TOL = 1e-12
DEFAULT_HORIZON = 4096
_MAX_HORIZON = 1 << 20


@dataclass(frozen=True)
class CertifiedInterval:
    """Closed interval ``[lower, upper]`` bracketing a nonnegative quantity."""

    lower: float
    upper: float

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def exact(cls, value: float) -> "CertifiedInterval":
        return cls(value, value)

    @property
    def is_exact(self) -> bool:
        return self.lower == self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol

    def to_list(self) -> list[float | None]:
        up = None if math.isinf(self.upper) else self.upper
        return [self.lower, up]

    @classmethod
    def from_list(cls, pair) -> "CertifiedInterval":
        lo, hi = pair
        return cls(lo, math.inf if hi is None else hi)

    def __repr__(self) -> str:
        return f"[{self.lower:.17g}, {self.upper:.17g}]"


def _as_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        value = complex(re, im)
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite scalar {value!r}")
    # drop signed zeros so serialization is canonical
    return complex(z.real + 0.0, z.imag + 0.0)


def _canonical_head(head) -> tuple[complex, ...]:
    if isinstance(head, np.ndarray) or (
            isinstance(head, (list, tuple)) and head and not isinstance(head[0], (list, tuple))):
        arr = np.asarray(head, dtype=complex).ravel()
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite head entry")
        return tuple((arr + 0.0).tolist())
    return tuple(_as_complex(v) for v in head)


def _trim(poly: Sequence[complex]) -> tuple[complex, ...]:
    poly = list(poly)
    while poly and poly[-1] == 0:
        poly.pop()
    return tuple(poly)


@dataclass(frozen=True)
class GeomTerm:
    """One tail term ``ratio**m * (coeff + sum_i higher[i-1] * C(m, i))``."""

    coeff: complex
    ratio: complex
    higher: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeff", _as_complex(self.coeff))
        object.__setattr__(self, "ratio", _as_complex(self.ratio))
        object.__setattr__(self, "higher", tuple(_as_complex(c) for c in self.higher))

    @classmethod
    def from_poly(cls, ratio: complex, poly: Sequence[complex]) -> "GeomTerm":
        poly = list(poly) or [0j]
        return cls(poly[0], ratio, tuple(poly[1:]))

    @property
    def poly(self) -> tuple[complex, ...]:
        return (self.coeff,) + self.higher

    @property
    def degree(self) -> int:
        return len(_trim(self.poly)) - 1

    @property
    def modulus(self) -> float:
        return abs(self.ratio)

    @property
    def is_unimodular(self) -> bool:
        return abs(abs(self.ratio) - 1.0) <= UNIT_TOL

    @property
    def is_decaying(self) -> bool:
        return abs(self.ratio) < 1.0 - UNIT_TOL

    @property
    def is_bounded(self) -> bool:
        return self.is_decaying or (self.is_unimodular and self.degree <= 0)

    def value(self, m: int) -> complex:
        if m < 0:
            raise ValueError(f"tail offset must be >= 0, got {m}")
        if len(self.poly) == 1:
            return self.coeff * self.ratio**m
        return complex(_term_values(self, np.array([m]))[0])

    def to_dict(self) -> dict:
        out = {"coeff": [self.coeff.real, self.coeff.imag],
               "ratio": [self.ratio.real, self.ratio.imag]}
        if self.higher:
            out["higher"] = [[c.real, c.imag] for c in self.higher]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "GeomTerm":
        return cls(_as_complex(d["coeff"]), _as_complex(d["ratio"]),
                   tuple(_as_complex(c) for c in d.get("higher", ())))


def binomial_poly_eval(poly: Sequence[complex], m: float) -> complex:
    """Evaluate ``sum_i poly[i] * C(m, i)`` (generalized binomial for real ``m``)."""
    total = 0j
    c = 1.0
    for i, p in enumerate(poly):
        if i:
            c = c * (m - i + 1) / i
        if p:
            total += p * c
    return total


def binomial_coeffs_from_values(values: Sequence[complex]) -> list[complex]:
    """Newton forward differences: coefficients in ``C(m, i)`` from ``P(0..d)``."""
    diffs = [complex(v) for v in values]
    out = []
    while diffs:
        out.append(diffs[0])
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
    return out


def _log_binom(m: np.ndarray, i: int) -> np.ndarray:
    return gammaln(m + 1.0) - gammaln(i + 1.0) - gammaln(m - i + 1.0)


def _term_values(term: GeomTerm, m: np.ndarray) -> np.ndarray:
    """Vectorised term values for integer offsets ``m >= 0``."""
    poly = _trim(term.poly)
    rho = term.ratio
    if not poly:
        return np.zeros(m.shape, dtype=complex)
    if len(poly) == 1:
        if rho.imag == 0:
            return poly[0] * np.power(rho.real, m.astype(float))
        return poly[0] * np.power(rho, m)
    r = abs(rho)
    if rho.imag == 0:
        phase = np.where(m % 2 == 1, math.copysign(1.0, rho.real), 1.0)
    else:
        phase = np.power(rho / r, m)
    logr = math.log(r)
    out = np.zeros(m.shape, dtype=complex)
    mf = m.astype(float)
    for i, p in enumerate(poly):
        if p == 0:
            continue
        mask = m >= i
        if not mask.any():
            continue
        mm = mf[mask]
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            mag = binom(mm, i) * np.power(r, mm)
        # direct product is exact-ish; fall back to logs where it over/underflows
        bad = ~np.isfinite(mag) | (mag == 0)
        if bad.any():
            mag[bad] = np.exp(_log_binom(mm[bad], i) + mm[bad] * logr)
        out[mask] += p * mag * phase[mask]
    return out


class GeomSequence:
    """Immutable head + tail sequence; see the module docstring."""

    __slots__ = ("head", "tail", "anchor", "_bounded")

    def __init__(self, head: Iterable = (), tail: Iterable[GeomTerm] = (),
                 anchor: int = 0, *, allow_unbounded: bool = False):
        head = _canonical_head(head)
        anchor = int(anchor)
        terms = [t if isinstance(t, GeomTerm) else GeomTerm(*t) for t in tail]
        merged: dict[complex, list[complex]] = {}
        for t in terms:
            acc = merged.setdefault(t.ratio, [])
            for i, c in enumerate(t.poly):
                if i < len(acc):
                    acc[i] += c
                else:
                    acc.append(c)
        kept = []
        for ratio, poly in merged.items():
            poly = _trim(poly)
            if ratio == 0 or not poly:
                # zero ratio contributes nothing for m >= 1
                continue
            kept.append(GeomTerm.from_poly(ratio, poly))
        kept.sort(key=lambda t: (t.ratio.real, t.ratio.imag))
        if not kept:
            head = _trim(head)
            anchor = 0
        elif not 0 <= anchor <= len(head):
            raise ValueError(f"anchor {anchor} outside [0, {len(head)}]")
        bounded = all(t.is_bounded for t in kept)
        if not bounded and not allow_unbounded:
            bad = [t.ratio for t in kept if not t.is_bounded]
            raise ValueError(f"tail ratios {bad} give an unbounded sequence")
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "tail", tuple(kept))
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "_bounded", bounded)

    def __setattr__(self, name, value):
        raise AttributeError("GeomSequence is immutable")

    # -- basic access ----------------------------------------------------
    @property
    def N(self) -> int:
        return len(self.head)

    @property
    def is_bounded(self) -> bool:
        return self._bounded

    @property
    def max_degree(self) -> int:
        return max((t.degree for t in self.tail), default=-1)

    def at(self, n: int) -> complex:
        if n < 1:
            raise ValueError(f"index must be >= 1, got {n}")
        if n <= self.N:
            return self.head[n - 1]
        m = n - self.anchor
        total = 0j
        for t in self.tail:
            total += t.value(m)
        return total

    __getitem__ = at

    def values(self, stop: int, start: int = 1) -> np.ndarray:
        """Array of ``x_n`` for ``start <= n <= stop``."""
        if start < 1:
            raise ValueError("start must be >= 1")
        n = np.arange(start, stop + 1)
        out = np.zeros(n.shape, dtype=complex)
        in_head = n <= self.N
        if in_head.any():
            out[in_head] = np.asarray(self.head, dtype=complex)[n[in_head] - 1]
        rest = ~in_head
        if rest.any() and self.tail:
            m = n[rest] - self.anchor
            acc = np.zeros(m.shape, dtype=complex)
            for t in self.tail:
                acc += _term_values(t, m)
            out[rest] = acc
        return out

    def is_zero(self) -> bool:
        return not self.tail and all(v == 0 for v in self.head)

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        out = {"head": [[v.real, v.imag] for v in self.head],
               "tail": [t.to_dict() for t in self.tail]}
        if self.anchor:
            out["anchor"] = self.anchor
        return out

    @classmethod
    def from_dict(cls, d: dict, *, allow_unbounded: bool = False) -> "GeomSequence":
        return cls([_as_complex(v) for v in d.get("head", [])],
                   [GeomTerm.from_dict(t) for t in d.get("tail", [])],
                   d.get("anchor", 0), allow_unbounded=allow_unbounded)

    def __repr__(self) -> str:
        return f"GeomSequence(head={list(self.head)!r}, tail={list(self.tail)!r}, anchor={self.anchor})"

    # -- arithmetic sugar --------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return scale(-1, self)

    def __rmul__(self, alpha):
        return scale(alpha, self)


def _build(head, tail, anchor) -> GeomSequence:
    return GeomSequence(head, tail, anchor, allow_unbounded=True)


def zero() -> GeomSequence:
    return GeomSequence()


def basis(k: int) -> GeomSequence:
    """The unit vector ``e_k``."""
    if k < 1:
        raise ValueError("basis index starts at 1")
    return GeomSequence([0] * (k - 1) + [1])


def constant(c: complex = 1.0) -> GeomSequence:
    """``(c, c, c, ...)``."""
    return GeomSequence([], [GeomTerm(c, 1.0)])


def evaluate(x: GeomSequence, n: int) -> complex:
    return x.at(n)


def materialize(x: GeomSequence, length: int) -> GeomSequence:
    """Same sequence with the head extended to at least ``length`` entries."""
    if length <= x.N:
        return x
    extra = x.values(length, x.N + 1)
    return _build(x.head + tuple(complex(v) for v in extra), x.tail, x.anchor)


def _rebase_term(t: GeomTerm, d: int) -> GeomTerm:
    # rho**(m+d) P(m+d) = rho**m [rho**d sum_j C(d, i-j) p_i C(m, j)]
    poly = t.poly
    rd = t.ratio**d
    new = []
    for j in range(len(poly)):
        s = 0j
        for i in range(j, len(poly)):
            s += poly[i] * math.comb(d, i - j)
        new.append(s * rd)
    return GeomTerm.from_poly(t.ratio, new)


def rebase(x: GeomSequence, anchor: int) -> GeomSequence:
    """Re-express the tail relative to a later anchor (values unchanged)."""
    d = anchor - x.anchor
    if d < 0:
        raise ValueError("can only move the anchor forward")
    if d == 0 or not x.tail:
        return x
    head = x.values(max(x.N, anchor)) if anchor > x.N else x.head
    return _build(head, [_rebase_term(t, d) for t in x.tail], anchor)


def add(x: GeomSequence, y: GeomSequence) -> GeomSequence:
    length = max(x.N, y.N)
    anchor = max(x.anchor if x.tail else 0, y.anchor if y.tail else 0)
    head = x.values(length) + y.values(length)
    tail = [_rebase_term(t, anchor - x.anchor) for t in x.tail]
    tail += [_rebase_term(t, anchor - y.anchor) for t in y.tail]
    return _build(head, tail, anchor)


def scale(alpha: complex, x: GeomSequence) -> GeomSequence:
    alpha = _as_complex(alpha)
    if alpha == 0:
        return zero()
    tail = [GeomTerm.from_poly(t.ratio, [alpha * c for c in t.poly]) for t in x.tail]
    return _build([alpha * v for v in x.head], tail, x.anchor)


def sub(x: GeomSequence, y: GeomSequence) -> GeomSequence:
    return add(x, scale(-1, y))


def backward_shift(x: GeomSequence) -> GeomSequence:
    """``B(x_1, x_2, ...) = (x_2, x_3, ...)``."""
    if x.anchor >= 1:
        return _build(x.head[1:], x.tail, x.anchor - 1)
    # anchor 0: move to -1 then forward to 0, i.e. multiply by rho
    tail = [_rebase_term(t, 1) for t in x.tail]
    return _build(x.head[1:], tail, 0)


def right_shift(x: GeomSequence) -> GeomSequence:
    """``(x_1, x_2, ...) -> (0, x_1, x_2, ...)``."""
    return _build((0j,) + x.head, x.tail, x.anchor + 1)


# -- norms -------------------------------------------------------------------

def _term_abs_bound(t: GeomTerm, m: np.ndarray) -> np.ndarray:
    """``|rho|**m * sum_i |p_i| C(m, i)``, a majorant of ``|term(m)|``."""
    absterm = GeomTerm.from_poly(abs(t.ratio), [abs(c) for c in t.poly])
    return np.abs(_term_values(absterm, m))


def _decay_start(t: GeomTerm) -> int:
    """Offset beyond which the term's absolute majorant is nonincreasing."""
    d = t.degree
    if d <= 0:
        return 0
    u = abs(t.ratio)
    # u (m+1)/(m+1-d) <= 1  <=>  m + 1 >= d / (1 - u)
    return int(math.ceil(d / (1.0 - u))) + 1


def sup_norm(x: GeomSequence, horizon: int = DEFAULT_HORIZON) -> CertifiedInterval:
    """Certified bracket for ``sup_n |x_n|``.

    Exact when the tail is a single constant-polynomial term.  Otherwise the
    tail is sampled on ``N < n <= N + horizon`` (extended until every term's
    majorant is monotone) and the rest is bounded by the majorant at the
    horizon.  Floating-point rounding of the samples is not tracked.
    """
    head_max = max((abs(v) for v in x.head), default=0.0)
    if not x.tail:
        return CertifiedInterval.exact(head_max)
    m_first = x.N + 1 - x.anchor
    if len(x.tail) == 1 and x.tail[0].degree == 0:
        t = x.tail[0]
        if t.is_unimodular or t.is_decaying:
            tail_sup = abs(t.coeff) * (abs(t.ratio) ** m_first if t.is_decaying else 1.0)
            return CertifiedInterval.exact(max(head_max, tail_sup))
    h = max(horizon, 1)
    for t in x.tail:
        if t.is_decaying:
            h = max(h, _decay_start(t) - m_first + 1)
    h = min(h, _MAX_HORIZON)
    sampled = float(np.max(np.abs(x.values(x.N + h, x.N + 1))))
    lower = max(head_max, sampled)
    if not x.is_bounded:
        return CertifiedInterval(lower, math.inf)
    m_next = np.array([m_first + h])
    remainder = 0.0
    for t in x.tail:
        if t.is_unimodular:
            remainder += abs(t.coeff)
        elif m_next[0] >= _decay_start(t):
            remainder += float(_term_abs_bound(t, m_next)[0])
        else:
            # horizon cap hit: fall back to sum_m u**m C(m, i) = u**i/(1-u)**(i+1)
            u = abs(t.ratio)
            remainder += sum(abs(c) * u**i / (1 - u) ** (i + 1) for i, c in enumerate(t.poly))
    return CertifiedInterval(lower, max(lower, remainder))


def quotient_seminorm(x: GeomSequence) -> CertifiedInterval:
    """Bracket for ``limsup_n |x_n|``, the norm of ``[x]`` in l-infinity / c0."""
    if not x.is_bounded:
        return CertifiedInterval(math.inf, math.inf)
    unimodular = [abs(t.coeff) for t in x.tail if t.is_unimodular]
    if not unimodular:
        return CertifiedInterval.exact(0.0)
    if len(unimodular) == 1:
        return CertifiedInterval.exact(unimodular[0])
    # distinct unimodular ratios: the Cesaro mean of |x_n|^2 is sum |c_j|^2,
    # so limsup |x_n| >= sqrt(sum |c_j|^2) > 0
    return CertifiedInterval(math.sqrt(sum(c * c for c in unimodular)), sum(unimodular))


def in_c0(x: GeomSequence) -> bool:
    """``x_n -> 0``.  Exact: see :func:`quotient_seminorm` for why no cancellation."""
    return x.is_bounded and all(t.is_decaying for t in x.tail)
