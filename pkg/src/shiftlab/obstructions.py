"""Obstructions for ``|lam| <= 2`` and the spectral toolkit on l-infinity / c0."""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .seqcore import (
    UNIT_TOL,
    CertifiedInterval,
    GeomSequence,
    GeomTerm,
    in_c0,
    sup_norm,
)
from .solvers import RegimeError, first_order_solve, preimage
from .symcalc import kernel_ratio

__all__ = [
    "ObstructionReport",
    "range_witness",
    "min_norm_lower_bound",
    "minimal_enclosing_circle",
    "two_point_lower_bound",
    "circle_eigenvector",
    "resolvent_solve",
    "spectral_circle_distance",
    "amix_membership",
]


def _require_unimodular(lam: complex) -> complex:
    lam = complex(lam)
    if abs(abs(lam) - 1) > UNIT_TOL:
        raise ValueError(f"|lam| must be 1, got {abs(lam):.17g}")
    return lam


def range_witness(lam: complex) -> GeomSequence:
    """``y_n = (-lam)**(-n)``: the ball of radius 1/2 around it misses the range of ``I + lam B``."""
    lam = _require_unimodular(lam)
    return GeomSequence([], [GeomTerm(1.0, kernel_ratio(lam))])


@dataclass(frozen=True)
class ObstructionReport:
    lam: complex
    N: int
    min_norm: CertifiedInterval
    floor: float
    w_description: str
    x1: complex
    dual_lower: float

    @property
    def floor_holds(self) -> bool:
        return self.min_norm.lower >= self.floor - 1e-9

    def to_dict(self) -> dict:
        return {"lambda": [self.lam.real, self.lam.imag], "N": self.N,
                "min_norm": self.min_norm.to_list(), "floor": self.floor,
                "w_description": self.w_description,
                "x1": [self.x1.real, self.x1.imag], "dual_lower": self.dual_lower}


def _circle2(a: complex, b: complex) -> tuple[complex, float]:
    return (a + b) / 2, abs(a - b) / 2


def _circle3(a: complex, b: complex, c: complex) -> tuple[complex, float] | None:
    bx, cx = b - a, c - a
    d = 2 * (bx.real * cx.imag - bx.imag * cx.real)
    if d == 0:
        return None
    b2, c2 = abs(bx) ** 2, abs(cx) ** 2
    ux = (cx.imag * b2 - bx.imag * c2) / d
    uy = (bx.real * c2 - cx.real * b2) / d
    center = a + complex(ux, uy)
    return center, max(abs(center - a), abs(center - b), abs(center - c))


def _support_radius(points: Sequence[complex]) -> float:
    """Exact minimal enclosing radius of at most three points."""
    if len(points) == 1:
        return 0.0
    if len(points) == 2:
        return abs(points[0] - points[1]) / 2
    a, b, c = points
    sides = sorted([abs(a - b), abs(b - c), abs(c - a)])
    # obtuse or right triangle: the longest side is a diameter
    if sides[2] ** 2 >= sides[0] ** 2 + sides[1] ** 2:
        return sides[2] / 2
    circ = _circle3(a, b, c)
    return sides[2] / 2 if circ is None else circ[1]


def minimal_enclosing_circle(points: Sequence[complex], seed: int = 0):
    """Welzl's algorithm; returns ``(center, radius, support)``."""
    pts = [complex(p) for p in points]
    if not pts:
        raise ValueError("no points")
    random.Random(seed).shuffle(pts)

    def outside(p, c, r):
        return abs(p - c) > r * (1 + 1e-14) + 1e-300

    c, r, sup = pts[0], 0.0, [pts[0]]
    for i in range(1, len(pts)):
        p = pts[i]
        if not outside(p, c, r):
            continue
        c, r, sup = p, 0.0, [p]
        for j in range(i):
            q = pts[j]
            if not outside(q, c, r):
                continue
            (c, r), sup = _circle2(p, q), [p, q]
            for k in range(j):
                s = pts[k]
                if not outside(s, c, r):
                    continue
                circ = _circle3(p, q, s)
                if circ is None:
                    # collinear: the farthest pair spans the circle
                    pair = max([(p, q), (p, s), (q, s)], key=lambda t: abs(t[0] - t[1]))
                    (c, r), sup = _circle2(*pair), list(pair)
                else:
                    (c, r), sup = circ, [p, q, s]
    return c, r, sup


def two_point_lower_bound(points: Sequence[complex]) -> float:
    """``max_{m,n} |c_m - c_n| / 2``: any centre is that far from one of the pair."""
    arr = np.asarray(points, dtype=complex)
    best = 0.0
    for i in range(len(arr)):
        best = max(best, float(np.max(np.abs(arr[i:] - arr[i]))))
    return best / 2


def min_norm_lower_bound(lam: complex, w: GeomSequence, N: int,
                         w_description: str = "") -> ObstructionReport:
    """Bracket ``min_{x_1} max_{n <= N} |x_n|`` over solutions of ``(I + lam B) x = w``.

    Solutions are ``x_n = A_n + B_n x_1`` with ``A`` the ``x_1 = 0`` solution and
    ``B_n = (-1/lam)**(n-1)`` unimodular, so ``|x_n| = |x_1 - c_n|`` with
    ``c_n = -A_n / B_n`` and the minimum is the radius of the smallest disk
    containing all ``c_n``.  The lower end is the exact radius of the support
    points (a subset), the upper end the realised maximum at the centre.
    """
    lam = _require_unimodular(lam)
    if N < 1:
        raise ValueError("N must be >= 1")
    A = preimage(lam, w, 0).values(N)
    rho = kernel_ratio(lam)
    Bn = np.array([rho**k for k in range(N)], dtype=complex)
    c = -A / Bn
    center, _, support = minimal_enclosing_circle(list(c))
    upper = float(np.max(np.abs(center - c)))
    lower = min(_support_radius(support), upper)
    return ObstructionReport(lam, N, CertifiedInterval(lower, upper), (N - 1) / 4,
                             w_description or "w", complex(center), two_point_lower_bound(c))


def _unit(theta: float) -> complex:
    q = theta / (math.pi / 2)
    if q == round(q):
        return (1, 1j, -1, -1j)[int(round(q)) % 4]
    return cmath.exp(1j * theta)


def circle_eigenvector(theta: float) -> GeomSequence:
    """``x_n = e^{i theta (n-1)}``, with ``B x = e^{i theta} x`` exactly."""
    return GeomSequence([1.0], [GeomTerm(1.0, _unit(theta))], anchor=1)


def resolvent_solve(mu: complex, y: GeomSequence) -> GeomSequence:
    """``x`` with ``(B - mu I) x = y`` and ``x_1 = 0``; ``||x|| <= ||y|| / (1 - |mu|)``.

    A tail ratio equal to ``mu`` is resonant and yields an ``n * mu**n`` term,
    which the sequence class represents exactly.
    """
    mu = complex(mu)
    if abs(mu) >= 1:
        raise ValueError(f"|mu| must be < 1, got {abs(mu):g}")
    return first_order_solve(mu, 1.0, y, 0)


def spectral_circle_distance(lam: complex) -> float:
    """Distance from the unit circle to ``{|1 + lam e^{it}|}``, i.e. ``max(|lam| - 2, 0)``.

    ``|1 + lam e^{it}|`` sweeps ``[||lam| - 1|, 1 + |lam|]``.
    """
    r = abs(complex(lam))
    return max(abs(r - 1.0) - 1.0, 0.0)


def amix_membership(lam: complex, x: GeomSequence) -> bool:
    """For ``|lam| > 2`` the set of ``J^mix``-class vectors of ``I + lam B`` is c0."""
    if abs(complex(lam)) <= 2:
        raise RegimeError("A^mix is empty in this regime (|lam| <= 2)")
    return in_c0(x)
