"""Acceptance criteria 1-10, one check each.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``; either way one PASS/FAIL line per
criterion is printed.
"""

from __future__ import annotations

import cmath
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from oracles import dense_preimage  # noqa: E402
from shiftlab.analytic import (  # noqa: E402
    analytic_mixing_chain,
    choose_params,
    corollary_rescale,
    deflate_and_delta,
    disk_zeros,
    hypothesis_check,
)
from shiftlab.obstructions import (  # noqa: E402
    amix_membership,
    circle_eigenvector,
    min_norm_lower_bound,
    range_witness,
    resolvent_solve,
    spectral_circle_distance,
)
from shiftlab.product import ProductOperator, distance_matrix, product_apply, product_chain, separated_family  # noqa: E402
from shiftlab.seqcore import GeomSequence, GeomTerm, add, basis, in_c0, sup_norm  # noqa: E402
from shiftlab.solvers import bounded_preimage, kernel_vector, mixing_chain, verify_certificate  # noqa: E402
from shiftlab.symcalc import apply_shift, apply_symbol, polynomial  # noqa: E402

SEED = 0


def _rng(k: int) -> np.random.Generator:
    return np.random.default_rng([SEED, k])


def _disk(rng, size, radius=1.0):
    r = radius * np.sqrt(rng.uniform(0, 1, size))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, size))


def _verified(cert) -> bool:
    return all(r["residual_ok"] and r["decay_ok"] for r in verify_certificate(cert))


def _params(f):
    zeros = disk_zeros(f)
    g, delta = deflate_and_delta(f, zeros)
    return choose_params(g, zeros, delta)


def check_1():
    rng = _rng(1)
    worst_res, worst_slack = 0.0, math.inf
    for _ in range(500):
        lam = rng.uniform(1.0, 5.0) * cmath.exp(2j * math.pi * rng.uniform())
        if abs(lam) <= 1:
            lam *= 1.001
        y = GeomSequence(_disk(rng, int(rng.integers(1, 13))))
        x = bounded_preimage(lam, y)
        res = float(np.max(np.abs(apply_shift(lam, x).values(200) - y.values(200))))
        worst_res = max(worst_res, res)
        worst_slack = min(worst_slack, sup_norm(y).upper / (abs(lam) - 1) + 1e-9 - sup_norm(x).upper)
    ok = worst_res <= 1e-10 and worst_slack >= 0
    return ok, f"max residual {worst_res:.2e}, min bound slack {worst_slack:.2e}"


def check_2():
    rng = _rng(2)
    worst = 0.0
    for _ in range(200):
        lam = rng.uniform(1.01, 5.0) * cmath.exp(2j * math.pi * rng.uniform())
        N = int(rng.integers(2, 65))
        y = GeomSequence(_disk(rng, int(rng.integers(1, 13))))
        diff = bounded_preimage(lam, y).values(N) - dense_preimage(lam, y.values(N), N)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst <= 1e-10, f"max deviation from dense oracle {worst:.2e}"


def check_3():
    cert = mixing_chain(3, basis(1), 40)
    slack = min(2.0**-e.n + 1e-12 - e.distance.upper for e in cert.entries)
    verified = _verified(cert)
    return slack >= 0 and verified and len(cert.entries) == 40, \
        f"min slack vs 2^-n {slack:.2e}, transported certificate verifies: {verified}"


def check_4():
    rep = min_norm_lower_bound(-1, range_witness(-1), 101)
    exact = rep.min_norm.to_list() == [50.0, 50.0] and rep.floor == 25.0
    rng = _rng(4)
    worst = math.inf
    N = 101
    for k in range(32):
        lam = cmath.exp(2j * math.pi * k / 32)
        y = range_witness(lam)
        for _ in range(50):
            eps = GeomSequence(_disk(rng, N, 0.49))
            worst = min(worst, min_norm_lower_bound(lam, add(y, eps), N).min_norm.lower)
    ok = exact and worst >= 25 - 1e-6
    return ok, f"lambda=-1 min_norm {rep.min_norm}, worst perturbed lower bound {worst:.6f} (floor 25)"


def check_5():
    eig_exact = True
    for k in range(64):
        x = circle_eigenvector(2 * math.pi * k / 64)
        mu = x.tail[0].ratio
        eig_exact &= sup_norm(apply_symbol(polynomial(-mu, 1), x)[0]).to_list() == [0.0, 0.0]
    rng = _rng(5)
    worst_res, worst_slack = 0.0, math.inf
    for _ in range(200):
        mu = complex(_disk(rng, 1, 0.95)[0])
        y = GeomSequence(_disk(rng, int(rng.integers(1, 13))))
        x = resolvent_solve(mu, y)
        back = apply_symbol(polynomial(-mu, 1), x)[0]
        worst_res = max(worst_res, float(np.max(np.abs(back.values(200) - y.values(200)))))
        worst_slack = min(worst_slack, sup_norm(y).upper / (1 - abs(mu)) + 1e-9 - sup_norm(x).upper)
    inj = True
    for _ in range(50):
        mu = complex(_disk(rng, 1, 0.9)[0])
        theta = 2 * math.pi * rng.uniform()
        extra = [GeomTerm(complex(_disk(rng, 1)[0]), complex(_disk(rng, 1, 0.9)[0]))]
        x = GeomSequence(_disk(rng, 4), [GeomTerm(0.5 + rng.uniform(), cmath.exp(1j * theta))] + extra)
        assert not in_c0(x)
        inj &= not in_c0(apply_symbol(polynomial(-mu, 1), x)[0])
    ok = eig_exact and worst_res <= 1e-10 and worst_slack >= 0 and inj
    return ok, (f"eigen residuals exact: {eig_exact}, resolvent residual {worst_res:.2e}, "
                f"bound slack {worst_slack:.2e}, injectivity: {inj}")


def check_6():
    rng = _rng(6)
    worst = 0.0
    for r in np.linspace(0, 4, 1000):
        lam = r * cmath.exp(2j * math.pi * rng.uniform())
        worst = max(worst, abs(spectral_circle_distance(lam) - max(r - 2, 0)))
    anchors = spectral_circle_distance(3) == 1 and spectral_circle_distance(2) == 0
    return worst <= 1e-9 and anchors, f"max deviation {worst:.2e}, anchors ok: {anchors}"


def check_7():
    z, z2, z3 = polynomial(0, 1), polynomial(0, 0, 1), polynomial(3, 1)
    p = _params(z)
    consts = (abs(p.R1 - 1.1) < 1e-12 and p.n0 == 8 and p.ab <= 0.25
              and abs(p.R0 - 1.21) < 1e-12 and not p.check())
    cert = analytic_mixing_chain(z, p.R0, basis(1), 5)
    blocks = all(cert.entry(m * p.n0).distance.upper <= p.ab**m + cert.entry(m * p.n0).error + 1e-15
                 for m in range(1, 6))
    z2_hyp = hypothesis_check(z2).holds is True
    z2_ok = _verified(analytic_mixing_chain(z2, 1.3, basis(1), 5))
    z3_rejected = hypothesis_check(z3).holds is False
    ok = consts and blocks and z2_hyp and z2_ok and z3_rejected
    return ok, (f"R1={p.R1:.12g} n0={p.n0} ab={p.ab:.4f} R0={p.R0:.12g}, block bounds: {blocks}, "
                f"z^2 hypothesis/chain: {z2_hyp}/{z2_ok}, z+3 rejected: {z3_rejected}")


def check_8():
    c, fs = corollary_rescale(polynomial(-0.5, 1))
    c_ok = abs(c - 0.5 / 1.1) <= 1e-9
    p = _params(fs)
    verified = _verified(analytic_mixing_chain(fs, p.R0, basis(1), 5))
    return c_ok and verified, f"c={c:.15g} (target {0.5 / 1.1:.15g}), rescaled chain verifies: {verified}"


def check_9():
    op = ProductOperator(2)
    cert = product_chain(op, basis(1), 20)
    slack = min(2.0**-e.n + 1e-9 - e.distance.upper for e in cert.entries)
    fam = separated_family(8)
    d = distance_matrix(fam)
    sep = len(fam) == 256 and bool(np.all(d[~np.eye(256, dtype=bool)] == 1.0))
    kernel = all(product_apply(op, m).is_zero() for m in fam)
    ok = slack >= 0 and sep and kernel and len(cert.entries) == 20
    return ok, f"min chain slack {slack:.2e}, 256 vectors 1-separated: {sep}, all in kernel: {kernel}"


def _amix_suite():
    rng = _rng(10)
    cases = []
    for k in range(100):
        kind = k % 3
        head = _disk(rng, int(rng.integers(0, 6)), 2.0)
        if kind == 0:
            cases.append((GeomSequence(head), True))
        elif kind == 1:
            rho = complex(_disk(rng, 1, 0.95)[0]) or 0.5
            cases.append((GeomSequence(head, [GeomTerm(1.0 + rng.uniform(), rho)], len(head)), True))
        else:
            rho = cmath.exp(2j * math.pi * rng.uniform())
            dec = GeomTerm(complex(_disk(rng, 1)[0]), 0.3)
            cases.append((GeomSequence(head, [GeomTerm(0.5 + rng.uniform(), rho), dec], len(head)), False))
    return cases


def check_10():
    cases = _amix_suite()
    agree = sum(amix_membership(3, x) == expected for x, expected in cases)
    return agree == 100, f"{agree}/100 agree with membership by construction"


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9, check_10]


def _line(k: int, ok: bool, detail: str) -> str:
    return f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} ({detail})"


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k, capsys):
    ok, detail = CHECKS[k - 1]()
    with capsys.disabled():
        print("\n" + _line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k, check in enumerate(CHECKS, 1):
        ok, detail = check()
        failed += not ok
        print(_line(k, ok, detail))
    sys.exit(1 if failed else 0)
