"""Functional calculus ``a(B)`` for polynomial and power-series symbols.

``(a(B) x)_n = sum_k a_k x_{n+k}``.  On a tail term ``rho**m P(m)`` this acts as
``rho**m sum_j t_j (Delta**j P)(m)`` with ``t_j = sum_k a_k C(k, j) rho**k``,
so tails map exactly; heads are handled by explicit (truncated) convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .seqcore import (
    CertifiedInterval,
    GeomSequence,
    GeomTerm,
    _as_complex,
    _build,
    _trim,
    sup_norm,
)

__all__ = [
    "Majorant",
    "OperatorSymbol",
    "CircleCertificate",
    "CertificationError",
    "polynomial",
    "apply_shift",
    "apply_backward",
    "apply_symbol",
    "symbol_multiply",
    "symbol_power",
    "symbol_reciprocal",
    "reciprocal_power",
    "symbol_opnorm",
    "certify_circle",
    "kernel_ratio",
    "DEFAULT_ZERO_FREE_RADIUS",
    "DEFAULT_TOL",
]

DEFAULT_ZERO_FREE_RADIUS = 1.0 + 1.0 / 16.0
DEFAULT_TOL = 1e-10
_MAX_ORDER = 1 << 16


class CertificationError(ArithmeticError):
    """A numerical certificate could not be established."""


@dataclass(frozen=True)
class Majorant:
    """``|a_k| <= M * gamma**k`` for every ``k`` beyond the stored coefficients."""

    M: float
    gamma: float

    def __post_init__(self):
        if not (self.M >= 0 and math.isfinite(self.M)):
            raise ValueError(f"majorant M must be finite and >= 0, got {self.M}")
        if not 0 <= self.gamma < 1:
            raise ValueError(f"majorant gamma must lie in [0, 1), got {self.gamma}")

    def tail_sum(self, K: int) -> float:
        """``sum_{k > K} M gamma**k``."""
        return self.M * self.gamma ** (K + 1) / (1.0 - self.gamma)


@dataclass(frozen=True)
class OperatorSymbol:
    """``a(z) = sum_k a_k z**k``; a series when ``majorant`` is given."""

    coeffs: tuple[complex, ...]
    majorant: Majorant | None = None

    def __post_init__(self):
        coeffs = tuple(_as_complex(c) for c in self.coeffs)
        if self.majorant is None:
            coeffs = _trim(coeffs)
        object.__setattr__(self, "coeffs", coeffs or (0j,))

    @property
    def kind(self) -> str:
        return "polynomial" if self.majorant is None else "series"

    @property
    def order(self) -> int:
        """Index ``K`` of the last stored coefficient."""
        return len(self.coeffs) - 1

    @property
    def is_polynomial(self) -> bool:
        return self.majorant is None

    def __call__(self, z: complex) -> complex:
        """Truncated evaluation (exact for polynomials)."""
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def truncation_error(self, radius: float) -> float:
        """Bound on ``|a(z) - truncated(z)|`` for ``|z| <= radius``."""
        if self.majorant is None:
            return 0.0
        u = self.majorant.gamma * radius
        if u >= 1:
            return math.inf
        return self.majorant.M * u ** (self.order + 1) / (1 - u)

    def to_dict(self) -> dict:
        maj = None if self.majorant is None else {"M": self.majorant.M, "gamma": self.majorant.gamma}
        return {"coeffs": [[c.real, c.imag] for c in self.coeffs], "majorant": maj}

    @classmethod
    def from_dict(cls, d: dict) -> "OperatorSymbol":
        maj = d.get("majorant")
        return cls(tuple(_as_complex(c) for c in d["coeffs"]),
                   None if maj is None else Majorant(maj["M"], maj["gamma"]))


def polynomial(*coeffs) -> OperatorSymbol:
    """Polynomial symbol from ascending coefficients."""
    if len(coeffs) == 1 and isinstance(coeffs[0], (list, tuple, np.ndarray)):
        coeffs = tuple(coeffs[0])
    return OperatorSymbol(tuple(coeffs))


def kernel_ratio(lam: complex) -> complex:
    """Ratio ``-1/lam`` of the kernel of ``I + lam B``.

    Every module computes it through this function so that resonance with the
    kernel can be detected by exact equality.
    """
    return -1 / complex(lam)


# -- tail machinery ----------------------------------------------------------

def _tail_multipliers(coeffs: Sequence[complex], rho: complex, degree: int) -> list[complex]:
    """``t_j = sum_k a_k C(k, j) rho**k`` for ``j = 0..degree``."""
    out = []
    for j in range(degree + 1):
        s = 0j
        rk = rho**j
        for k in range(j, len(coeffs)):
            if coeffs[k]:
                s += coeffs[k] * math.comb(k, j) * rk
            rk *= rho
        out.append(s)
    return out


def _map_poly(poly: Sequence[complex], t: Sequence[complex]) -> list[complex]:
    # sum_j t_j Delta**j P ; Delta shifts binomial-basis coefficients down
    d = len(poly)
    return [sum(t[j] * poly[i + j] for j in range(d - i) if j < len(t)) for i in range(d)]


def _binom_geom_tail(v: float, j: int, K: int) -> float:
    """``sum_{k > K} C(k, j) v**k`` for ``0 <= v < 1``."""
    if v == 0:
        return 0.0
    k = K + 1
    total = 0.0
    while True:
        term = math.comb(k, j) * v**k if k >= j else 0.0
        q = v * (k + 1) / (k + 1 - j) if k + 1 > j else 1.0
        if q < 1 and k >= j:
            return total + term / (1 - q)
        total += term
        k += 1


def _sup_binom_geom(u: float, i: int) -> float:
    """``sup_{m >= 0} C(m, i) u**m``, bounded by the full sum when ``u < 1``."""
    if i == 0:
        return 1.0
    if u >= 1:
        return math.inf
    return u**i / (1 - u) ** (i + 1)


def _head_values(a: OperatorSymbol, x: GeomSequence) -> np.ndarray:
    N, K = x.N, a.order
    if N == 0:
        return np.zeros(0, dtype=complex)
    xs = x.values(N + K)
    coeffs = np.asarray(a.coeffs, dtype=complex)
    out = np.zeros(N, dtype=complex)
    for k, c in enumerate(coeffs):
        if c != 0:
            out += c * xs[k:k + N]
    return out


def apply_symbol(a: OperatorSymbol, x: GeomSequence) -> tuple[GeomSequence, float]:
    """``a(B) x`` and a rigorous sup-norm bound on the truncation error.

    The error is zero for polynomial symbols.
    """
    err = 0.0
    if a.majorant is not None:
        gamma = a.majorant.gamma
        for t in x.tail:
            if abs(t.ratio) * gamma >= 1:
                raise ValueError(f"tail ratio {t.ratio} outside the symbol's disk of convergence")
    tail = []
    tail_err = 0.0
    for t in x.tail:
        deg = len(t.poly) - 1
        mult = _tail_multipliers(a.coeffs, t.ratio, deg)
        tail.append(GeomTerm.from_poly(t.ratio, _map_poly(t.poly, mult)))
        if a.majorant is not None:
            v = a.majorant.gamma * abs(t.ratio)
            u = abs(t.ratio)
            for j in range(deg + 1):
                r_j = a.majorant.M * _binom_geom_tail(v, j, a.order)
                if r_j:
                    tail_err += r_j * sum(abs(t.poly[i + j]) * _sup_binom_geom(u, i)
                                          for i in range(deg + 1 - j))
    head = _head_values(a, x)
    if a.majorant is not None:
        if x.N:
            head_err = a.majorant.tail_sum(a.order) * sup_norm(x).upper
        else:
            head_err = 0.0
        err = max(head_err, tail_err)
    return _build(head, tail, x.anchor), err


def apply_shift(lam: complex, x: GeomSequence) -> GeomSequence:
    """``(I + lam B) x``, exact; ``lam = 0`` is the identity."""
    lam = complex(lam)
    if lam == 0:
        return x
    kr = kernel_ratio(lam)
    tail = []
    for t in x.tail:
        if t.ratio == kr:
            mult = [0j, -1 + 0j]
        else:
            mult = [1 + lam * t.ratio, lam * t.ratio]
        tail.append(GeomTerm.from_poly(t.ratio, _map_poly(t.poly, mult)))
    head = np.zeros(0, dtype=complex)
    if x.N:
        xs = x.values(x.N + 1)
        head = xs[:-1] + lam * xs[1:]
    return _build(head, tail, x.anchor)


def apply_backward(x: GeomSequence, power: int = 1, lam: complex = 1.0) -> GeomSequence:
    """``(lam B)**power x``."""
    coeffs = [0j] * power + [complex(lam) ** power]
    return apply_symbol(polynomial(coeffs), x)[0]


# -- symbol algebra ------------------------------------------------------------

def _hat(a: OperatorSymbol, gamma: float) -> float:
    """``A`` with ``|a_k| <= A gamma**k`` for all ``k``."""
    best = a.majorant.M if a.majorant is not None else 0.0
    for k, c in enumerate(a.coeffs):
        if c:
            if gamma == 0:
                if k:
                    return math.inf
                best = max(best, abs(c))
            else:
                best = max(best, abs(c) / gamma**k)
    return best


def symbol_multiply(a: OperatorSymbol, b: OperatorSymbol) -> OperatorSymbol:
    """Product symbol with a rigorously propagated majorant."""
    if a.is_polynomial and b.is_polynomial:
        return OperatorSymbol(tuple(np.convolve(a.coeffs, b.coeffs)))
    if b.is_polynomial:
        a, b = b, a
    if a.is_polynomial:
        # a polynomial, b series: c_k known up to K_b
        K = b.order
        coeffs = np.convolve(a.coeffs, b.coeffs)[:K + 1]
        gamma = b.majorant.gamma
        if gamma == 0:
            M = 0.0 if b.majorant.M == 0 else math.inf
        else:
            M = _hat(b, gamma) * sum(abs(c) / gamma**i for i, c in enumerate(a.coeffs))
        return OperatorSymbol(tuple(coeffs), Majorant(M, gamma))
    K = min(a.order, b.order)
    coeffs = np.convolve(a.coeffs[:K + 1], b.coeffs[:K + 1])[:K + 1]
    ga, gb = a.majorant.gamma, b.majorant.gamma
    if ga != gb:
        g = max(ga, gb)
        M = _hat(a, ga) * _hat(b, gb) / (1 - min(ga, gb) / g)
    else:
        # sum_i g**i g**(k-i) = (k+1) g**k; absorb (k+1) by moving to sqrt(g)
        g = math.sqrt(ga)
        s = ga / g
        kmax = max(0.0, -1.0 / math.log(s) - 1.0) if 0 < s < 1 else 0.0
        factor = max((k + 1) * s**k for k in (math.floor(kmax), math.ceil(kmax)))
        M = _hat(a, ga) * _hat(b, gb) * factor
    return OperatorSymbol(tuple(coeffs), Majorant(M, g))


def symbol_power(a: OperatorSymbol, m: int) -> OperatorSymbol:
    if m < 0:
        raise ValueError("power must be >= 0")
    result = polynomial(1)
    base = a
    while m:
        if m & 1:
            result = symbol_multiply(result, base)
        m >>= 1
        if m:
            base = symbol_multiply(base, base)
    return result


@dataclass(frozen=True)
class CircleCertificate:
    """Facts about a polynomial on the circle ``|z| = radius``."""

    radius: float
    min_modulus: CertifiedInterval
    winding: int | None
    exact_modulus: bool
    grid: int

    @property
    def zero_free_disk(self) -> bool:
        """No zeros in the closed disk of this radius."""
        return self.min_modulus.lower > 0 and self.winding == 0


def _modulus_sq_coeffs(coeffs: np.ndarray, radius: float) -> np.ndarray:
    """``s_j`` with ``|a(r e^{it})|**2 = sum_j s_j e^{ijt}``, for ``j >= 0``."""
    scaled = coeffs * radius ** np.arange(len(coeffs))
    d = len(scaled)
    return np.array([np.sum(scaled[j:] * np.conj(scaled[:d - j])) for j in range(d)])


def certify_circle(coeffs: Sequence[complex], radius: float = 1.0, grid_log2: int = 14,
                   rel_tol: float = 1e-13, max_refine: int = 12) -> CircleCertificate:
    """Certified ``min |a(z)|`` on ``|z| = radius`` plus the winding number.

    Works on ``S(t) = |a(r e^{it})|**2``: on a cell of half-width ``h`` around a
    grid point, ``S >= S(t_j) - |S'(t_j)| h - max|S''| h**2 / 2`` with
    ``max|S''| <= sum_{j != 0} j**2 |s_j|``.  Cells whose bound is not yet tight
    are subdivided.  When all ``s_j`` (``j != 0``) vanish to rounding, ``|a|`` is
    constant on the circle and the minimum is exact.
    """
    c = np.asarray(_trim([_as_complex(v) for v in coeffs]) or (0j,), dtype=complex)
    G = 1 << grid_log2
    s = _modulus_sq_coeffs(c, radius)
    scale_sq = float(np.sum(np.abs(c * radius ** np.arange(len(c)))) ** 2)
    noise = 64 * np.finfo(float).eps * max(scale_sq, 1e-300)
    if len(s) == 1 or np.all(np.abs(s[1:]) <= noise):
        m = math.sqrt(max(s[0].real, 0.0))
        winding = None
        if m > 0:
            winding = _winding(c, radius, G)
        return CircleCertificate(radius, CertifiedInterval.exact(m), winding, True, G)

    j = np.arange(1, len(s))
    s2max = 2.0 * float(np.sum(j.astype(float) ** 2 * np.abs(s[1:])))
    dc = c[1:] * np.arange(1, len(c))

    def evaluate(t):
        z = radius * np.exp(1j * t)
        a = np.polyval(c[::-1], z)
        da = np.polyval(dc[::-1], z) if len(dc) else np.zeros_like(z)
        S = np.abs(a) ** 2
        dS = 2.0 * np.real(np.conj(a) * da * 1j * z)
        return S, dS

    width = 2 * math.pi / G
    centers = np.arange(G) * width
    h = width / 2
    S, dS = evaluate(centers)
    best_sample = float(S.min())
    lower_cells = S - np.abs(dS) * h - 0.5 * s2max * h * h
    # refine cells whose lower bound is below the best sample by more than tol
    active_c, active_lb = centers, lower_cells
    settled_lb = math.inf
    for _ in range(max_refine):
        target = best_sample - rel_tol * max(best_sample, scale_sq * 1e-3)
        bad = active_lb < target
        if not bad.any():
            break
        settled_lb = min(settled_lb, float(active_lb[~bad].min()) if (~bad).any() else math.inf)
        parents = active_c[bad]
        if parents.size > 1 << 16:
            parents = parents[np.argsort(active_lb[bad])[: 1 << 16]]
            # cells dropped from refinement keep their (loose) bound
            dropped = np.setdiff1d(active_c[bad], parents)
            if dropped.size:
                settled_lb = min(settled_lb, float(active_lb[bad].min()))
        sub = 8
        h = h / sub
        offs = (np.arange(sub) - (sub - 1) / 2) * 2 * h
        active_c = (parents[:, None] + offs[None, :]).ravel()
        S, dS = evaluate(active_c)
        best_sample = min(best_sample, float(S.min()))
        active_lb = S - np.abs(dS) * h - 0.5 * s2max * h * h
    lb = min(settled_lb, float(active_lb.min()))
    lb = min(lb, best_sample)
    lower = math.sqrt(lb) if lb > 0 else 0.0
    upper = math.sqrt(best_sample)
    winding = _winding(c, radius, G) if lower > 0 else None
    return CircleCertificate(radius, CertifiedInterval(lower, upper), winding, False, G)


def _winding(c: np.ndarray, radius: float, G: int, max_refine: int = 6) -> int | None:
    """Argument-principle zero count inside ``|z| < radius``.

    Each arc is certified not to wind around 0: ``|a(z) - a(z_j)| <= L * arc``
    with ``L = sum k |a_k| r**(k-1)`` must stay below ``|a(z_j)|``.
    """
    L = float(np.sum(np.abs(c[1:]) * np.arange(1, len(c)) * radius ** np.arange(len(c) - 1)))
    for _ in range(max_refine):
        t = np.arange(G + 1) * (2 * math.pi / G)
        vals = np.polyval(c[::-1], radius * np.exp(1j * t))
        arc = 2 * math.pi * radius / G
        if np.all(L * arc < np.abs(vals[:-1])):
            incr = np.angle(vals[1:] / vals[:-1])
            return int(round(float(np.sum(incr)) / (2 * math.pi)))
        G *= 4
    return None


def _certify_zero_free(a: OperatorSymbol, radius: float, grid_log2: int) -> CircleCertificate:
    if not a.is_polynomial:
        raise CertificationError("zero-free certification needs a polynomial symbol")
    cert = certify_circle(a.coeffs, radius, grid_log2)
    if not cert.zero_free_disk:
        raise CertificationError(
            f"cannot certify the symbol is zero-free on |z| <= {radius}: "
            f"min |a| in {cert.min_modulus}, winding {cert.winding}")
    return cert


def reciprocal_power(a: OperatorSymbol, n: int, zero_free_radius: float = DEFAULT_ZERO_FREE_RADIUS,
                     tol: float = DEFAULT_TOL, min_order: int = 64, grid_log2: int = 14,
                     circle: CircleCertificate | None = None) -> OperatorSymbol:
    """Taylor coefficients of ``a(z)**(-n)`` with a Cauchy majorant.

    ``|[z**k] a**(-n)| <= min_{|z|=r} |a|**(-n) * r**(-k)``; the order is raised
    until the majorant tail sum drops below ``tol``.
    """
    if n < 1:
        raise ValueError("power must be >= 1")
    if zero_free_radius <= 1:
        raise ValueError("zero_free_radius must exceed 1")
    if a.is_polynomial and len(a.coeffs) == 1:
        if a.coeffs[0] == 0:
            raise CertificationError("zero symbol has no reciprocal")
        return polynomial(a.coeffs[0] ** (-n))
    if circle is None or circle.radius != zero_free_radius:
        circle = _certify_zero_free(a, zero_free_radius, grid_log2)
    M = circle.min_modulus.lower ** (-n)
    gamma = 1.0 / zero_free_radius
    maj = Majorant(M, gamma)
    K = min_order
    if M > 0:
        K = max(K, math.ceil(math.log(tol * (1 - gamma) / M) / math.log(gamma)))
    while maj.tail_sum(K) >= tol:
        K += 1
    if K > _MAX_ORDER:
        raise CertificationError("reciprocal order cap reached")
    p = np.asarray(symbol_power(a, n).coeffs, dtype=complex)
    d = len(p) - 1
    b = np.zeros(K + 1, dtype=complex)
    inv0 = 1.0 / p[0]
    b[0] = inv0
    for k in range(1, K + 1):
        i = np.arange(1, min(k, d) + 1)
        b[k] = -np.dot(p[i], b[k - i]) * inv0
    return OperatorSymbol(tuple(b), maj)


def symbol_reciprocal(a: OperatorSymbol, zero_free_radius: float = DEFAULT_ZERO_FREE_RADIUS,
                      tol: float = DEFAULT_TOL, grid_log2: int = 14) -> OperatorSymbol:
    """``1 / a(z)``; requires ``a`` zero-free on ``|z| <= zero_free_radius``."""
    return reciprocal_power(a, 1, zero_free_radius, tol=tol, grid_log2=grid_log2)


def symbol_opnorm(a: OperatorSymbol) -> CertifiedInterval:
    """Norm of ``a(B)`` on l-infinity, which is ``sum_k |a_k|``."""
    s = float(np.sum(np.abs(np.asarray(a.coeffs, dtype=complex))))
    if a.majorant is None:
        return CertifiedInterval.exact(s)
    return CertifiedInterval(s, s + a.majorant.tail_sum(a.order))
