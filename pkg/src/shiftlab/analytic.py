"""Mixing certificates for ``R f(B)`` when the closed unit disk lies in ``f`` of itself.

Pipeline: certify the hypothesis (Rouché), locate the zeros ``z_k`` of ``f``
inside the disk, deflate ``f = g p`` with ``p = prod (z - z_k)``, pick
``R1`` so that ``R1 g`` and ``R1 p`` both have controlled right inverses,
then alternate ``h(B)**(-n0)`` with ``n0`` factored stages per block.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .seqcore import CertifiedInterval, GeomSequence, GeomTerm, basis, sup_norm
from .solvers import (
    MixingCertificate,
    RegimeError,
    _entry,
    factored_preimage,
    fill_chain,
    symbol_operator,
    transport_certificate,
)
from .symcalc import (
    DEFAULT_ZERO_FREE_RADIUS,
    CertificationError,
    CircleCertificate,
    OperatorSymbol,
    apply_symbol,
    certify_circle,
    polynomial,
    reciprocal_power,
    symbol_opnorm,
)

__all__ = [
    "HypothesisError",
    "HypothesisCertificate",
    "PipelineParams",
    "hypothesis_check",
    "disk_zeros",
    "deflate_and_delta",
    "choose_params",
    "analytic_mixing_chain",
    "corollary_rescale",
]

BOUNDARY_TOL = 1e-9
N0_CAP = 10_000


class HypothesisError(CertificationError):
    """The disk-covering hypothesis is false or could not be certified."""


@dataclass(frozen=True)
class HypothesisCertificate:
    holds: bool | None
    min_modulus: CertifiedInterval
    zeros_inside: int | None
    reason: str

    def __bool__(self) -> bool:
        return self.holds is True


def _require_polynomial(f: OperatorSymbol) -> None:
    if not f.is_polynomial:
        raise ValueError("the pipeline needs a polynomial symbol; truncate the series first")


def hypothesis_check(f: OperatorSymbol, grid_log2: int = 14) -> HypothesisCertificate:
    """Rouché route to ``closed disk <= f(closed disk)``.

    ``min_{|z|=1} |f| >= 1`` together with a zero inside gives, for every
    ``|w| < 1``, a zero of ``f - w`` inside; compactness closes the disk.
    ``holds`` is False only when ``f`` certifiably has no zero in the closed
    disk (so 0 is missed), and None when neither side can be certified.
    """
    coeffs = f.coeffs
    slack = f.truncation_error(1.0)
    cert = certify_circle(coeffs, 1.0, grid_log2)
    lo = max(cert.min_modulus.lower - slack, 0.0)
    mm = CertifiedInterval(lo, cert.min_modulus.upper + slack)
    w = cert.winding if slack < cert.min_modulus.lower else None
    if w == 0 and lo > 0:
        return HypothesisCertificate(False, mm, 0, "no zero in the closed disk, so 0 is not covered")
    if lo >= 1 and w is not None and w >= 1:
        return HypothesisCertificate(True, mm, w, "min |f| >= 1 on the circle and a zero inside")
    if mm.upper < 1:
        reason = "min |f| < 1 on the circle; the Rouché route does not apply"
    else:
        reason = "certified bounds straddle the threshold"
    return HypothesisCertificate(None, mm, w, f"cannot certify: {reason}")


def _newton(c_desc: np.ndarray, z: complex, iters: int = 20) -> complex:
    dc = np.polyder(c_desc)
    best, best_res = z, abs(np.polyval(c_desc, z))
    for _ in range(iters):
        d = np.polyval(dc, z)
        if d == 0 or best_res == 0:
            break
        z = z - np.polyval(c_desc, z) / d
        res = abs(np.polyval(c_desc, z))
        if not res < best_res:
            break
        best, best_res = z, res
    return complex(best)


def disk_zeros(f: OperatorSymbol) -> list[complex]:
    """Zeros of ``f`` in the open unit disk, with multiplicity."""
    _require_polynomial(f)
    c_desc = np.asarray(f.coeffs[::-1], dtype=complex)
    if len(c_desc) == 1:
        return []
    roots = np.roots(c_desc)
    out = []
    for r in roots:
        m = abs(r)
        if abs(m - 1) <= BOUNDARY_TOL:
            raise HypothesisError("boundary zero, hypothesis violated or ill-conditioned")
        if m < 1 - BOUNDARY_TOL:
            out.append(_newton(c_desc, complex(r)) if r != 0 else 0j)
    out.sort(key=lambda z: (abs(z), z.real, z.imag))
    return out


def _synthetic_division(coeffs: tuple[complex, ...], z: complex) -> tuple[complex, ...]:
    """Quotient of ``a(w) / (w - z)`` (ascending coefficients), remainder dropped."""
    desc = list(coeffs[::-1])
    q = [desc[0]]
    for c in desc[1:-1]:
        q.append(c + z * q[-1])
    return tuple(q[::-1])


def deflate_and_delta(f: OperatorSymbol, zeros: list[complex],
                      grid_log2: int = 14) -> tuple[OperatorSymbol, float]:
    """``g`` with ``f = g * prod (z - z_k)`` and a certified lower bound on ``min |g|`` over the disk."""
    _require_polynomial(f)
    coeffs = f.coeffs
    for z in zeros:
        coeffs = _synthetic_division(coeffs, z)
    g = polynomial(coeffs)
    cert = certify_circle(g.coeffs, 1.0, grid_log2)
    delta = cert.min_modulus.lower
    if not (delta > 0 and cert.winding == 0):
        raise HypothesisError(f"deflated factor not certified zero-free on the disk (delta={delta:g})")
    return g, delta


@dataclass(frozen=True)
class PipelineParams:
    zeros: list[complex]
    delta: float
    R1: float
    n0: int
    a: float
    b: float
    R0: float
    kappa: float
    margin: float = 0.1
    a_target: float = 0.5
    g: OperatorSymbol = field(default_factory=lambda: polynomial(1))

    @property
    def zero_product(self) -> float:
        return math.prod(abs(abs(z) - 1) for z in self.zeros)

    @property
    def ab(self) -> float:
        return self.a * self.b

    def check(self) -> list[str]:
        """Violated invariants (empty when all hold)."""
        bad = []
        if not self.R1 * self.delta > 1:
            bad.append("R1 * delta > 1")
        if not self.R1 * self.zero_product > 1:
            bad.append("R1 * prod > 1")
        if not math.isclose(self.b, (1 / (self.R1 * self.zero_product)) ** self.n0, rel_tol=1e-12):
            bad.append("b formula")
        if not self.ab < 1:
            bad.append("a * b < 1")
        if not 0 < self.a < 1 or not 0 < self.b < 1:
            bad.append("a, b in (0, 1)")
        if self.R0 != self.R1**2:
            bad.append("R0 = R1**2")
        return bad

    def to_dict(self) -> dict:
        d = asdict(self)
        d["zeros"] = [[z.real, z.imag] for z in self.zeros]
        d["g"] = self.g.to_dict()
        d["ab"] = self.ab
        return d


def _circle(h: OperatorSymbol, grid_log2: int) -> CircleCertificate | None:
    if len(h.coeffs) == 1:
        return None
    cert = certify_circle(h.coeffs, DEFAULT_ZERO_FREE_RADIUS, grid_log2)
    if not cert.zero_free_disk:
        raise CertificationError(
            f"cannot certify the cofactor zero-free on |z| <= {DEFAULT_ZERO_FREE_RADIUS}")
    return cert


def choose_params(g: OperatorSymbol, zeros: list[complex], delta: float, margin: float = 0.1,
                  a_target: float = 0.5, grid_log2: int = 14) -> PipelineParams:
    if margin <= 0:
        raise ValueError("margin must be > 0")
    if not 0 < a_target < 1:
        raise ValueError("a_target must lie in (0, 1)")
    prod = math.prod(abs(abs(z) - 1) for z in zeros)
    R1 = (1 + margin) * max(1 / delta, 1 / prod, 1.0)
    h = polynomial([R1 * c for c in g.coeffs])
    circ = _circle(h, grid_log2)
    for n0 in range(1, N0_CAP + 1):
        a = symbol_opnorm(reciprocal_power(h, n0, circle=circ, grid_log2=grid_log2)).upper
        if a <= a_target:
            break
    else:
        raise CertificationError("contraction not certified")
    b = (1 / (R1 * prod)) ** n0
    kappa = symbol_opnorm(reciprocal_power(h, 1, circle=circ, grid_log2=grid_log2)).upper / (R1 * prod)
    return PipelineParams(list(zeros), delta, R1, n0, a, b, R1**2, kappa, margin, a_target, g)


def _kernel_of_p(zeros: list[complex]) -> GeomSequence:
    """A nonzero vector killed by ``p(B)``: ``(z**n)`` for a nonzero zero, else ``e1``."""
    for z in zeros:
        if z != 0:
            return GeomSequence([], [GeomTerm(1.0, z)])
    return basis(1)


def _prepare(f: OperatorSymbol, margin: float, a_target: float, grid_log2: int) -> PipelineParams:
    _require_polynomial(f)
    hyp = hypothesis_check(f, grid_log2)
    if not hyp.holds:
        raise HypothesisError(f"hypothesis not certified: {hyp.reason}")
    zeros = disk_zeros(f)
    g, delta = deflate_and_delta(f, zeros, grid_log2)
    return choose_params(g, zeros, delta, margin, a_target, grid_log2)


def analytic_mixing_chain(f: OperatorSymbol, R: float, y: GeomSequence, m_max: int, *,
                          margin: float = 0.1, a_target: float = 0.5, grid_log2: int = 14,
                          base_point: bool = True) -> MixingCertificate:
    """Certificate for ``T = R f(B)``, ``R >= R0``, filled to every ``n <= m_max * n0``.

    ``T = h(B) P(B)`` with ``h = (R / R1) g`` and ``P = R1 p``; since
    ``h = (R / R0) R1 g``, ``||h(B)**(-n0)|| <= a`` whenever ``R >= R0``.
    """
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    params = _prepare(f, margin, a_target, grid_log2)
    if R < params.R0 * (1 - 1e-12):
        raise RegimeError(f"R = {R:g} is below R0 = {params.R0:g}")
    n0, R1, zeros = params.n0, params.R1, params.zeros
    T = polynomial([R * c for c in f.coeffs])
    T_norm = symbol_opnorm(T).upper
    h = polynomial([(R / R1) * c for c in params.g.coeffs])
    h_norm = symbol_opnorm(h).upper
    circ = _circle(h, grid_log2)
    # the truncation error is amplified by ||T||**n in the residual; keep it negligible
    tol = max(1e-250, 1e-17 / max(1.0, T_norm) ** (m_max * n0))
    inv_block = reciprocal_power(h, n0, circle=circ, tol=tol, grid_log2=grid_log2)
    inv_step = reciprocal_power(h, 1, circle=circ, tol=tol, grid_log2=grid_log2)
    a_R = symbol_opnorm(inv_block).upper
    kappa = symbol_opnorm(inv_step).upper / (R1 * params.zero_product)

    entries = []
    v, err = y, 0.0
    for m in range(1, m_max + 1):
        w, e = apply_symbol(inv_block, v)
        for _ in range(n0):
            w = factored_preimage(zeros, R1, w)
        # T**(m n0) v_m - y = T**((m-1) n0) h**n0 d + (old residual)
        err = err + T_norm ** ((m - 1) * n0) * h_norm**n0 * e
        v = w
        entries.append(_entry(m * n0, v, None, err))

    def single_step(u: GeomSequence) -> tuple[GeomSequence, float]:
        w, e = apply_symbol(inv_step, u)
        return factored_preimage(zeros, R1, w), h_norm * e

    ynorm = sup_norm(y).upper
    rate = (a_R * params.b) ** (1.0 / n0)
    block = MixingCertificate(symbol_operator(T), GeomSequence(), y, tuple(entries),
                              rate, ynorm, params={**params.to_dict(), "R": R})
    cert = fill_chain(block, n0, single_step, kappa, T_norm)
    if base_point:
        cert = transport_certificate(cert, _kernel_of_p(zeros))
    return cert


def corollary_rescale(f: OperatorSymbol, margin: float = 0.1,
                      grid_log2: int = 14) -> tuple[float, OperatorSymbol]:
    """``(c, f / c)`` with ``f / c`` satisfying the hypothesis, when 0 is interior to ``f(disk)``.

    ``R f(B) = (R c) (f / c)(B)``, so certificates for the rescaled symbol
    transfer with ``R`` replaced by ``R c``.
    """
    _require_polynomial(f)
    cert = certify_circle(f.coeffs, 1.0, grid_log2)
    c0 = cert.min_modulus.lower
    if not (c0 > 0 and cert.winding is not None and cert.winding >= 1):
        raise HypothesisError("0 is not certified interior to f(closed disk)")
    c = c0 / (1 + margin)
    return c, polynomial([x / c for x in f.coeffs])
