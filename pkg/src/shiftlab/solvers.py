"""Preimages, kernel vectors and mixing certificates.

A :class:`MixingCertificate` is the executable form of "``y`` lies in the
extended mixing limit set of ``x``": for each ``n`` it stores a displacement
``w`` with ``T**n (x + w) = y`` (up to a certified error) and ``||w||``
decaying like ``offset * rate**n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .seqcore import (
    CertifiedInterval,
    GeomSequence,
    GeomTerm,
    _as_complex,
    _build,
    _rebase_term,
    add,
    rebase,
    right_shift,
    scale,
    sub,
    sup_norm,
)
from .symcalc import OperatorSymbol, apply_shift, apply_symbol, kernel_ratio, polynomial

__all__ = [
    "RegimeError",
    "ChainEntry",
    "MixingCertificate",
    "kernel_vector",
    "preimage",
    "first_order_solve",
    "bounded_preimage",
    "mixing_chain",
    "factored_preimage",
    "transport_certificate",
    "fill_chain",
    "shift_operator",
    "symbol_operator",
    "apply_operator",
    "verify_certificate",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = "v1"
KERNEL_TOL = 1e-12


class RegimeError(ValueError):
    """The requested construction does not exist for these parameters."""


# -- linear recurrences ---------------------------------------------------------

def _particular(rho: complex, poly: Sequence[complex], mu: complex, s: complex) -> list[complex]:
    # solve (rho - mu) Q + rho Delta Q = s P in the binomial basis
    d = len(poly)
    if rho == mu:
        return [0j] + [s * p / rho for p in poly]
    q = [0j] * d
    nxt = 0j
    for i in range(d - 1, -1, -1):
        nxt = (s * poly[i] - rho * nxt) / (rho - mu)
        q[i] = nxt
    return q


def first_order_solve(mu: complex, s: complex, y: GeomSequence, x1: complex = 0) -> GeomSequence:
    """Solve ``x_{n+1} = mu x_n + s y_n`` with the given ``x_1``.

    Equivalently ``(B - mu I) x = s y``.  Tails are solved term by term
    (``rho == mu`` is the resonant case and raises the polynomial degree);
    the kernel ratio ``mu`` carries the homogeneous part.  The result may be
    unbounded; check :attr:`GeomSequence.is_bounded`.
    """
    mu, s, x1 = complex(mu), complex(s), _as_complex(x1)
    N = y.N
    y = rebase(y, N)
    xs = [x1]
    for v in y.head:
        xs.append(mu * xs[-1] + s * v)
    tail = []
    part1 = 0j
    for t in y.tail:
        q = _particular(t.ratio, t.poly, mu, s)
        tail.append(GeomTerm.from_poly(t.ratio, q))
        part1 += t.ratio * (q[0] + (q[1] if len(q) > 1 else 0j))
    if mu == 0:
        return _build(xs, tail, N)
    # homogeneous part anchored one step later: no division by mu
    tail = [_rebase_term(t, 1) for t in tail]
    tail.append(GeomTerm(xs[N] - part1, mu))
    return _build(xs, tail, N + 1)


def preimage(lam: complex, y: GeomSequence, x1: complex = 0) -> GeomSequence:
    """The solution of ``(I + lam B) x = y`` with prescribed ``x_1``.

    Forward substitution ``x_{n+1} = (y_n - x_n) / lam`` on the head and an
    exact tail beyond; unbounded when ``|lam| < 1`` or on resonance with a
    unimodular tail.
    """
    lam = complex(lam)
    if lam == 0:
        raise ValueError("I + 0 B is the identity; use y itself")
    return first_order_solve(kernel_ratio(lam), 1 / lam, y, x1)


def kernel_vector(lam: complex, w1: complex = 1.0) -> GeomSequence:
    """``w_n = w1 * (-1/lam)**(n-1)``, spanning the kernel of ``I + lam B``."""
    lam = complex(lam)
    if lam == 0:
        raise RegimeError("identity has trivial kernel")
    if abs(lam) < 1:
        raise RegimeError(f"kernel not in l-infinity for |lam| = {abs(lam):g} < 1")
    rho = kernel_ratio(lam)
    # anchor 0: w_n = (w1 / rho) * rho**n
    return GeomSequence([], [GeomTerm(-lam * complex(w1), rho)])


def bounded_preimage(lam: complex, y: GeomSequence) -> GeomSequence:
    """The ``x_1 = 0`` preimage, with ``||x|| <= ||y|| / (|lam| - 1)``."""
    lam = complex(lam)
    if abs(lam) <= 1:
        raise RegimeError(f"no uniform bound available for |lam| = {abs(lam):g} <= 1")
    return preimage(lam, y, 0)


def factored_preimage(zeros: Sequence[complex], R1: float, y: GeomSequence) -> GeomSequence:
    """Solve ``R1 * prod_k (B - z_k I) x = y`` for disk zeros ``z_k``.

    Each factor is solved with a bounded right inverse, so
    ``||x|| <= ||y|| / (R1 * prod_k (1 - |z_k|))``.
    """
    zeros = [complex(z) for z in zeros]
    if R1 <= 0:
        raise ValueError("R1 must be positive")
    for z in zeros:
        if abs(z) >= 1:
            raise ValueError(f"zero {z} is not inside the unit disk")
    x = scale(1.0 / R1, y)
    for z in zeros:
        # (B - z) x' = x  <=>  x'_{n+1} = z x'_n + x_n, started at x'_1 = 0
        x = right_shift(x) if z == 0 else first_order_solve(z, 1.0, x, 0)
    return x


# -- operators ------------------------------------------------------------------

def shift_operator(lam: complex) -> dict:
    lam = complex(lam)
    return {"kind": "shift", "lambda": [lam.real, lam.imag]}


def symbol_operator(symbol: OperatorSymbol) -> dict:
    if not symbol.is_polynomial:
        raise ValueError("certificate operators must be polynomial symbols")
    return {"kind": "symbol", "symbol": symbol.to_dict()}


def apply_operator(op: dict, x: GeomSequence) -> GeomSequence:
    kind = op["kind"]
    if kind == "shift":
        return apply_shift(_as_complex(op["lambda"]), x)
    if kind == "symbol":
        return apply_symbol(OperatorSymbol.from_dict(op["symbol"]), x)[0]
    if kind == "product":
        from .product import ProductOperator, product_apply

        return product_apply(ProductOperator(_as_complex(op["lambda"])), x)
    raise ValueError(f"unknown operator kind {kind!r}")


def _operator_norm(op: dict) -> float:
    kind = op["kind"]
    if kind == "shift":
        return 1 + abs(_as_complex(op["lambda"]))
    if kind == "symbol":
        from .symcalc import symbol_opnorm

        return symbol_opnorm(OperatorSymbol.from_dict(op["symbol"])).upper
    if kind == "product":
        return abs(_as_complex(op["lambda"]))
    raise ValueError(f"unknown operator kind {kind!r}")


# -- certificates -----------------------------------------------------------------

@dataclass(frozen=True)
class ChainEntry:
    """``T**n (base + displacement) = target`` up to ``error``."""

    n: int
    displacement: GeomSequence
    distance: CertifiedInterval
    norm: CertifiedInterval
    error: float = 0.0

    def to_dict(self) -> dict:
        return {"n": self.n, "displacement": self.displacement.to_dict(),
                "distance": self.distance.to_list(), "norm": self.norm.to_list(),
                "error": self.error}

    @classmethod
    def from_dict(cls, d: dict) -> "ChainEntry":
        return cls(d["n"], GeomSequence.from_dict(d["displacement"]),
                   CertifiedInterval.from_list(d["distance"]),
                   CertifiedInterval.from_list(d["norm"]), d.get("error", 0.0))


@dataclass(frozen=True)
class MixingCertificate:
    operator: dict
    base_point: GeomSequence
    target: GeomSequence
    entries: tuple[ChainEntry, ...]
    rate: float
    offset: float
    non_decaying: bool = False
    params: dict | None = None

    def vector(self, entry: ChainEntry) -> GeomSequence:
        """The chain point ``base + displacement``."""
        return add(self.base_point, entry.displacement)

    def entry(self, n: int) -> ChainEntry:
        for e in self.entries:
            if e.n == n:
                return e
        raise KeyError(n)

    def bound(self, n: int) -> float:
        return self.offset * self.rate**n

    def to_dict(self) -> dict:
        out = {"schema": SCHEMA_VERSION, "operator": self.operator,
               "base_point": self.base_point.to_dict(), "target": self.target.to_dict(),
               "rate": self.rate, "offset": self.offset, "non_decaying": self.non_decaying,
               "entries": [e.to_dict() for e in self.entries]}
        if self.params is not None:
            out["params"] = self.params
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "MixingCertificate":
        if d.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported certificate schema {d.get('schema')!r}")
        return cls(d["operator"], GeomSequence.from_dict(d["base_point"]),
                   GeomSequence.from_dict(d["target"]),
                   tuple(ChainEntry.from_dict(e) for e in d["entries"]),
                   d["rate"], d["offset"], d.get("non_decaying", False), d.get("params"))


def _entry(n: int, w: GeomSequence, base: GeomSequence | None = None, error: float = 0.0) -> ChainEntry:
    dist = sup_norm(w)
    norm = dist if base is None or base.is_zero() else sup_norm(add(base, w))
    return ChainEntry(n, w, dist, norm, error)


def mixing_chain(lam: complex, y: GeomSequence, n_max: int, *, base_point: bool = True) -> MixingCertificate:
    """Iterated bounded preimages ``(I + lam B)**n w_n = y``.

    ``||w_n|| <= ||y|| / (|lam| - 1)**n``, decaying only for ``|lam| > 2``;
    for ``1 < |lam| <= 2`` the certificate is emitted with ``non_decaying``.
    With ``base_point`` the chain is transported to the kernel vector
    ``kernel_vector(lam, 1)``.
    """
    lam = complex(lam)
    if lam == 0:
        raise RegimeError("identity: J-sets are singletons")
    if abs(lam) <= 1:
        raise RegimeError(f"|lam| = {abs(lam):g} <= 1: no bounded preimage chain")
    rate = 1.0 / (abs(lam) - 1.0)
    ynorm = sup_norm(y).upper
    entries = []
    w = y
    for n in range(1, n_max + 1):
        w = bounded_preimage(lam, w)
        entries.append(_entry(n, w))
    cert = MixingCertificate(shift_operator(lam), GeomSequence(), y, tuple(entries),
                             rate, ynorm, non_decaying=rate >= 1)
    if base_point:
        cert = transport_certificate(cert, kernel_vector(lam, 1))
    return cert


def transport_certificate(cert: MixingCertificate, x: GeomSequence) -> MixingCertificate:
    """Move a certificate based at 0 to a kernel vector ``x``.

    ``T**n (x + w_n) = T**n w_n`` because ``T x = 0``; the displacements and
    their decay are inherited unchanged.
    """
    if not cert.base_point.is_zero():
        raise ValueError("transport starts from a certificate based at 0")
    residual = sup_norm(apply_operator(cert.operator, x)).upper
    if residual > KERNEL_TOL * max(1.0, sup_norm(x).upper):
        raise ValueError(f"base point is not in the kernel (residual {residual:.3g})")
    entries = tuple(_entry(e.n, e.displacement, x, e.error) for e in cert.entries)
    return replace(cert, base_point=x, entries=entries)


def fill_chain(block_cert: MixingCertificate, n0: int,
               single_step: Callable[[GeomSequence], tuple[GeomSequence, float]],
               kappa: float, step_residual_gain: float = 1.0) -> MixingCertificate:
    """Extend a certificate known at ``n = m * n0`` to every ``n``.

    Entry ``n = m n0 + r`` applies ``r`` single-step right inverses to block
    ``m`` (block 0 is the target itself).  With block rate ``q = rate**n0``,
    ``||entry n|| <= kappa**r q**m ||y|| <= C rate**n`` where
    ``C = offset * max(1, kappa / rate)**(n0 - 1)``.

    ``single_step`` returns ``(u, err)`` with ``T u = v + e``, ``||e|| <= err``;
    ``step_residual_gain`` bounds ``||T||`` for propagating those errors.
    """
    if n0 == 1:
        return block_cert
    blocks = {0: (block_cert.target, 0.0)}
    for e in block_cert.entries:
        if e.n % n0:
            raise ValueError("block certificate must be indexed by multiples of n0")
        blocks[e.n // n0] = (e.displacement, e.error)
    m_max = max(blocks)
    T = step_residual_gain
    entries = []
    for m in range(m_max + 1):
        v, err = blocks[m]
        if m:
            entries.append(_entry(m * n0, v, None, err))
        if m == m_max:
            break
        u, u_err = v, err
        for r in range(1, n0):
            u, step_err = single_step(u)
            # T**(m n0 + r) u - y: old residual plus T**(m n0 + r - 1) e
            u_err = u_err + T ** (m * n0 + r - 1) * step_err
            entries.append(_entry(m * n0 + r, u, None, u_err))
    rate = block_cert.rate
    offset = block_cert.offset * max(1.0, kappa / rate) ** (n0 - 1)
    entries.sort(key=lambda e: e.n)
    cert = replace(block_cert, entries=tuple(entries), offset=offset)
    if not block_cert.base_point.is_zero():
        cert = replace(cert, entries=tuple(_entry(e.n, e.displacement, block_cert.base_point, e.error)
                                           for e in entries))
    return cert


def verify_certificate(cert: MixingCertificate, rtol: float = 1e-10) -> list[dict]:
    """Re-check every entry; returns one record per entry with ``ok`` flags.

    Residual: ``||T**n w_n - y|| <= error + rtol * n * max(1, ||y||)``.  The base
    point is checked separately (``T x = 0``) so the residual is computed on the
    displacement, avoiding cancellation against ``x``.
    Decay: ``distance.upper <= offset * rate**n`` (with ``rtol`` slack).
    """
    op = cert.operator
    ynorm = max(1.0, sup_norm(cert.target).upper)
    kernel_res = 0.0
    if not cert.base_point.is_zero():
        kernel_res = sup_norm(apply_operator(op, cert.base_point)).upper
    kernel_ok = kernel_res <= KERNEL_TOL * max(1.0, sup_norm(cert.base_point).upper)
    records = []
    for e in sorted(cert.entries, key=lambda e: e.n):
        v = e.displacement
        for _ in range(e.n):
            v = apply_operator(op, v)
        res = sup_norm(sub(v, cert.target)).upper
        tol = e.error + rtol * e.n * ynorm
        bound = cert.bound(e.n)
        records.append({
            "n": e.n,
            "residual": res,
            "residual_ok": res <= tol and kernel_ok,
            "distance_upper": e.distance.upper,
            "bound": bound,
            "decay_ok": e.distance.upper <= bound * (1 + 1e-12) + 1e-15,
        })
    return records
