"""Command-line experiment driver: ``shiftlab <subcommand> [options]``.

Exit codes: 0 success, 2 hypothesis certification failure, 3 regime error,
4 I/O error.  ``SHIFTLAB_THREADS`` caps the worker count of scans.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analytic import (
    HypothesisError,
    analytic_mixing_chain,
    choose_params,
    corollary_rescale,
    deflate_and_delta,
    disk_zeros,
    hypothesis_check,
)
from .obstructions import (
    amix_membership,
    circle_eigenvector,
    min_norm_lower_bound,
    range_witness,
    spectral_circle_distance,
)
from .product import ProductOperator, distance_matrix, product_apply, product_chain, separated_family
from .seqcore import CertifiedInterval, GeomSequence, basis, constant, quotient_seminorm, sup_norm
from .solvers import RegimeError, mixing_chain, verify_certificate
from .symcalc import CertificationError, apply_symbol, polynomial

EXIT_OK, EXIT_HYPOTHESIS, EXIT_REGIME, EXIT_IO = 0, 2, 3, 4


# -- parsing helpers ----------------------------------------------------------

def parse_complex(text: str) -> complex:
    """``"3"``, ``"-1"``, ``"1+2i"``, ``"0.5-0.5j"``."""
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def parse_grid(text: str) -> list[float]:
    """``"start:stop:step"`` (inclusive) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + k * step, 12) for k in range(count)]
    else:
        values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise argparse.ArgumentTypeError("empty grid")
    return values


def parse_coeffs(text: str) -> list[complex]:
    return [parse_complex(v) for v in text.split(",")]


def load_target(text: str) -> GeomSequence:
    """Builtin ``e<k>`` / ``const``, or a path to a JSON-encoded sequence."""
    if text == "const":
        return constant(1.0)
    if text.startswith("e") and text[1:].isdigit():
        return basis(int(text[1:]))
    with open(text, encoding="utf-8") as fh:
        return GeomSequence.from_dict(json.load(fh))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SHIFTLAB_THREADS", "1")))
    except ValueError:
        return 1


def _clean(obj):
    """JSON-safe copy: complex to ``[re, im]``, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, CertifiedInterval):
        return obj.to_list()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


class Writer:
    def __init__(self, out_dir: str, fmt: str | None):
        self.out_dir = Path(out_dir)
        self.fmt = fmt
        self.written: list[str] = []

    def wants(self, kind: str) -> bool:
        return self.fmt is None or self.fmt == kind

    def write(self, name: str, text: str) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        path.write_text(text, encoding="utf-8")
        self.written.append(str(path))


def decay_svg(ns, observed, bound, title: str, width: int = 480, height: int = 320) -> str:
    """Static line chart of ``log10`` norms against ``n``."""
    pad = 40
    pts = [(n, math.log10(v)) for n, v in zip(ns, observed) if v > 0]
    bpts = [(n, math.log10(v)) for n, v in zip(ns, bound) if v > 0 and math.isfinite(v)]
    allp = pts + bpts
    if not allp:
        allp = [(0, 0.0), (1, 1.0)]
    x0, x1 = min(p[0] for p in allp), max(p[0] for p in allp)
    y0, y1 = min(p[1] for p in allp), max(p[1] for p in allp)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def xy(p):
        x = pad + (p[0] - x0) / (x1 - x0) * (width - 2 * pad)
        y = height - pad - (p[1] - y0) / (y1 - y0) * (height - 2 * pad)
        return f"{x:.2f},{y:.2f}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="20" font-size="12">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width - pad}" y="{height - 10}" font-size="10" text-anchor="end">n = {x0:g}..{x1:g}</text>',
        f'<text x="5" y="{pad - 5}" font-size="10">log10 norm {y0:.1f}..{y1:.1f}</text>',
    ]
    if bpts:
        lines.append('<polyline fill="none" stroke="gray" stroke-dasharray="4 3" points="'
                     + " ".join(xy(p) for p in bpts) + '"/>')
    if pts:
        lines.append('<polyline fill="none" stroke="steelblue" stroke-width="2" points="'
                     + " ".join(xy(p) for p in pts) + '"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _summary(cert, records) -> dict:
    return {
        "entries": len(records),
        "all_residuals_ok": all(r["residual_ok"] for r in records),
        "all_decay_ok": all(r["decay_ok"] for r in records),
        "max_residual": max((r["residual"] for r in records), default=0.0),
        "rate": cert.rate,
        "offset": cert.offset,
        "non_decaying": cert.non_decaying,
    }


# -- subcommands -----------------------------------------------------------------

def cmd_mixing_chain(args, out: Writer) -> dict:
    y = load_target(args.target)
    cert = mixing_chain(args.lam, y, args.n_max)
    records = verify_certificate(cert, args.tol)
    if out.wants("json"):
        out.write("mixing_chain.json", dumps({"certificate": cert.to_dict(), "verification": records}))
    if out.wants("svg"):
        ns = [e.n for e in cert.entries]
        out.write("mixing_chain.svg", decay_svg(
            ns, [e.distance.upper for e in cert.entries], [cert.bound(n) for n in ns],
            f"lambda = {args.lam}: ||w_n|| (solid) vs bound (dashed)"))
    return _summary(cert, records)


SCAN_COLUMNS = ["modulus", "rate_bound", "chain_norm_lower", "chain_norm_upper",
                "spectral_distance", "obstruction_floor", "min_norm_lower", "min_norm_upper"]


def _scan_row(r: float, n_max: int, N: int) -> dict:
    row = {c: "" for c in SCAN_COLUMNS}
    row["modulus"] = r
    row["spectral_distance"] = spectral_circle_distance(r)
    if r > 1:
        cert = mixing_chain(r, basis(1), n_max, base_point=False)
        norm = cert.entries[-1].norm
        row.update(rate_bound=1 / (r - 1), chain_norm_lower=norm.lower, chain_norm_upper=norm.upper)
    if abs(r - 1) <= 1e-12:
        rep = min_norm_lower_bound(1.0, range_witness(1.0), N)
        row.update(obstruction_floor=rep.floor, min_norm_lower=rep.min_norm.lower,
                   min_norm_upper=rep.min_norm.upper)
    return row


def cmd_threshold_scan(args, out: Writer) -> dict:
    grid = args.lambda_grid
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(lambda r: _scan_row(r, args.n_max, args.N), grid))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SCAN_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(float(v)) if v != "" else "") for k, v in row.items()})
    if out.wants("csv"):
        out.write("threshold_scan.csv", buf.getvalue())
    return {"points": len(rows)}


def cmd_range_witness(args, out: Writer) -> dict:
    lam = args.lam
    rep = min_norm_lower_bound(lam, range_witness(lam), args.N, "range witness (-lam)**(-n)")
    report = {**rep.to_dict(), "floor_holds": rep.floor_holds}
    if out.wants("json"):
        out.write("range_witness.json", dumps(report))
    return report


def cmd_quotient(args, out: Writer) -> dict:
    rows = []
    for k in range(args.theta_grid):
        theta = 2 * math.pi * k / args.theta_grid
        x = circle_eigenvector(theta)
        mu = x.tail[0].ratio
        res = sup_norm(apply_symbol(polynomial(-mu, 1), x)[0])
        rows.append({"theta": theta, "eigenvalue": mu, "residual": res,
                     "quotient_norm": quotient_seminorm(x)})
    report = {"eigenvectors": rows,
              "all_exact": all(r["residual"].lower == 0 and r["residual"].upper == 0 for r in rows)}
    if out.wants("json"):
        out.write("quotient.json", dumps(report))
    return {"all_exact": report["all_exact"], "count": len(rows)}


def cmd_analytic(args, out: Writer) -> dict:
    f = polynomial(args.f)
    report: dict = {"f": f.to_dict()}
    R_scale = 1.0
    if args.corollary:
        c, f = corollary_rescale(f, args.margin, args.grid_log2)
        report.update(c=c, f_scaled=f.to_dict())
        R_scale = c
    hyp = hypothesis_check(f, args.grid_log2)
    report["hypothesis"] = {"holds": hyp.holds, "min_modulus": hyp.min_modulus,
                            "zeros_inside": hyp.zeros_inside, "reason": hyp.reason}
    if not hyp.holds:
        if out.wants("json"):
            out.write("analytic.json", dumps(report))
        raise HypothesisError(hyp.reason)
    zeros = disk_zeros(f)
    g, delta = deflate_and_delta(f, zeros, args.grid_log2)
    params = choose_params(g, zeros, delta, args.margin, args.a_target, args.grid_log2)
    R = args.R if args.R is not None else params.R0
    y = load_target(args.target)
    cert = analytic_mixing_chain(f, R, y, args.m_max, margin=args.margin,
                                 a_target=args.a_target, grid_log2=args.grid_log2)
    records = verify_certificate(cert, args.tol)
    report.update(params=params.to_dict(), R=R, R_original=R * R_scale,
                  certificate=cert.to_dict(), verification=records)
    if out.wants("json"):
        out.write("analytic.json", dumps(report))
    if out.wants("svg"):
        ns = [e.n for e in cert.entries]
        out.write("analytic.svg", decay_svg(
            ns, [e.distance.upper for e in cert.entries], [cert.bound(n) for n in ns],
            "pipeline chain: ||v_n|| (solid) vs bound (dashed)"))
    return {"R1": params.R1, "n0": params.n0, "ab": params.ab, "R0": params.R0,
            **_summary(cert, records)}


def cmd_product(args, out: Writer) -> dict:
    op = ProductOperator(args.lam)
    cert = product_chain(op, load_target(args.target), args.n_max)
    records = verify_certificate(cert, args.tol)
    family = separated_family(args.k)
    dist = distance_matrix(family)
    kernel_ok = all(product_apply(op, m).is_zero() for m in family)
    off = dist[~np.eye(len(family), dtype=bool)]
    report = {"certificate": cert.to_dict(), "verification": records,
              "family_size": len(family), "kernel_ok": kernel_ok,
              "min_distance": float(off.min()) if off.size else None,
              "max_distance": float(off.max()) if off.size else None,
              "note": "2**k kernel vectors, pairwise 1-separated; a finite witness, not a proof "
                      "of non-separability"}
    if out.wants("json"):
        out.write("product.json", dumps(report))
        out.write("product_family.json", dumps([m.to_dict() for m in family]))
    if out.wants("csv"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in dist:
            w.writerow([repr(float(v)) for v in row])
        out.write("product_distances.csv", buf.getvalue())
    return {"family_size": len(family), "kernel_ok": kernel_ok,
            "min_distance": report["min_distance"], **_summary(cert, records)}


def cmd_amix(args, out: Writer) -> dict:
    x = load_target(args.target)
    member = amix_membership(args.lam, x)
    report = {"lambda": args.lam, "member": member, "target": x.to_dict()}
    if out.wants("json"):
        out.write("amix.json", dumps(report))
    return {"member": member}


# -- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shiftlab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default="shiftlab-out")
    common.add_argument("--format", choices=["json", "csv", "svg"], default=None,
                        help="write only this output kind (default: all)")
    common.add_argument("--tol", type=float, default=1e-10, help="relative residual tolerance")
    common.add_argument("--horizon", type=int, default=4096)
    common.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mixing-chain", parents=[common])
    s.add_argument("--lambda", dest="lam", type=parse_complex, default=3.0)
    s.add_argument("--target", default="e1")
    s.add_argument("--n-max", type=int, default=40)
    s.set_defaults(func=cmd_mixing_chain)

    s = sub.add_parser("threshold-scan", parents=[common])
    s.add_argument("--lambda-grid", type=parse_grid, default=parse_grid("0.5:4:0.25"))
    s.add_argument("--n-max", type=int, default=20)
    s.add_argument("--N", type=int, default=101)
    s.set_defaults(func=cmd_threshold_scan)

    s = sub.add_parser("range-witness", parents=[common])
    s.add_argument("--lambda", dest="lam", type=parse_complex, default=-1.0)
    s.add_argument("--N", type=int, default=101)
    s.set_defaults(func=cmd_range_witness)

    s = sub.add_parser("quotient", parents=[common])
    s.add_argument("--theta-grid", type=int, default=64)
    s.set_defaults(func=cmd_quotient)

    s = sub.add_parser("analytic", parents=[common])
    s.add_argument("--f", type=parse_coeffs, default=parse_coeffs("0,1"),
                   help="ascending coefficients, e.g. '0,1' for f(z) = z")
    s.add_argument("--R", type=float, default=None, help="default: R0")
    s.add_argument("--m-max", type=int, default=5)
    s.add_argument("--margin", type=float, default=0.1)
    s.add_argument("--a-target", type=float, default=0.5)
    s.add_argument("--grid-log2", type=int, default=14)
    s.add_argument("--target", default="e1")
    s.add_argument("--corollary", action="store_true", help="rescale f first")
    s.set_defaults(func=cmd_analytic)

    s = sub.add_parser("product", parents=[common])
    s.add_argument("--lambda", dest="lam", type=parse_complex, default=2.0)
    s.add_argument("--n-max", type=int, default=20)
    s.add_argument("--k", type=int, default=8)
    s.add_argument("--target", default="e1")
    s.set_defaults(func=cmd_product)

    s = sub.add_parser("amix", parents=[common])
    s.add_argument("--lambda", dest="lam", type=parse_complex, default=3.0)
    s.add_argument("--target", default="e1")
    s.set_defaults(func=cmd_amix)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "tol", 1) <= 0:
        print("error: --tol must be > 0", file=sys.stderr)
        return EXIT_REGIME
    out = Writer(args.out_dir, args.format)
    try:
        summary = args.func(args, out)
    except (HypothesisError, CertificationError) as exc:
        print(f"hypothesis certification failed: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (OSError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(dumps({"command": args.command, "summary": summary, "written": out.written}), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
