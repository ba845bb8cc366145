"""Command-line front end.

Examples::

    polynet gen uniform-box --n 2 --N 12 --seed 3 --out cloud.csv
    polynet net weak2 --input cloud.csv --out cert.json
    polynet verify --input cloud.csv --certificate cert.json --mode exact
    polynet bounds --n 2 --k 2

Exit codes: 0 success or verified, 1 verification failed (a polynomial keeping
less than the guarantee was found), 2 capability refusal, 3 input error,
4 numerical failure.

Random numbers come from numpy's counter-based Philox generator keyed by
``--seed``, so generated clouds and heuristic runs are reproducible across
platforms and worker counts.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .adversary import EXACT_CAP, exact_min_mass, heuristic_min_mass, witness_report
from .bounds_lab import caratheodory_bounds, grid_vanishing_dimension
from .depth import find_centerpoint, tukey_depth
from .errors import (BasisOverflowError, CapabilityError, DegenerateInputError, DimensionError,
                     EigenConvergenceError, InfeasibleError, LPIterationError, NotPSDError)
from .nets import NetCertificate, strong_net, weak_net_quadratic
from .poly_core import PointCloud, basis_size, format_poly

log = logging.getLogger("polynet")

EXIT_OK, EXIT_FAILED, EXIT_CAPABILITY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3, 4
GENERATORS = ("uniform-box", "gaussian", "annulus", "grid", "two-clusters")


class InputError(Exception):
    pass


# --------------------------------------------------------------------------
# serialization


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = f"{x:.17g}"
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every real written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj.tolist() if isinstance(obj, np.ndarray) else obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    return json.dumps(str(obj))


def cloud_to_csv(cloud: PointCloud, with_weights: bool | None = None) -> str:
    if with_weights is None:
        with_weights = not cloud.is_uniform()
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    header = [f"x{i + 1}" for i in range(cloud.n)] + (["weight"] if with_weights else [])
    wr.writerow(header)
    for i, x in enumerate(cloud.points):
        row = [repr(float(v)) for v in x]
        if with_weights:
            row.append(repr(float(cloud.weights[i])))
        wr.writerow(row)
    return buf.getvalue()


def cloud_from_csv(text: str) -> PointCloud:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError("empty point-cloud file")
    header = [h.strip() for h in rows[0]]
    has_w = header[-1] == "weight"
    coords = header[:-1] if has_w else header
    if not coords or coords != [f"x{i + 1}" for i in range(len(coords))]:
        raise InputError(f"bad header {rows[0]!r}; expected x1,...,xn[,weight]")
    if len(rows) < 2:
        raise InputError("point-cloud file has no data rows")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as err:
        raise InputError(f"non-numeric entry: {err}") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise InputError("every row needs one value per header column")
    n = len(coords)
    return PointCloud(data[:, :n], data[:, n] if has_w else None)


def load_cloud(path: str) -> PointCloud:
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as err:
        raise InputError(f"cannot read {path}: {err}") from None
    return cloud_from_csv(text)


def load_certificate(path: str) -> NetCertificate:
    try:
        return NetCertificate.from_dict(json.loads(Path(path).read_text()))
    except (OSError, ValueError, KeyError, TypeError) as err:
        raise InputError(f"cannot read certificate {path}: {err}") from None


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    out = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.extend(_flatten(v, key + "."))
        else:
            out.append((key, v))
    return out


def _emit(payload, args, text: str | None = None) -> None:
    if text is None:
        if getattr(args, "format", "json") == "csv" and isinstance(payload, dict):
            buf = io.StringIO()
            wr = csv.writer(buf, lineterminator="\n")
            wr.writerow(["key", "value"])
            for k, v in _flatten(payload):
                wr.writerow([k, dumps(v, indent=0).replace("\n", "")])
            text = buf.getvalue()
        else:
            text = dumps(payload) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# generators


def generate(spec: str, n: int, N: int, seed: int = 0, k: int | None = None) -> PointCloud:
    """Synthetic cloud; deterministic for fixed arguments."""
    if spec not in GENERATORS:
        raise InputError(f"unknown generator {spec!r}; choose from {', '.join(GENERATORS)}")
    if n is None or n < 1:
        raise InputError("--n must be at least 1")
    if spec == "grid":
        if k is None or k < 1:
            raise InputError("grid needs --k >= 1")
        axes = [np.arange(1, k + 1, dtype=float)] * n
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        return PointCloud(pts)
    if N is None or N < 1:
        raise InputError("--N must be at least 1 (an empty cloud is not a measure)")
    rng = np.random.Generator(np.random.Philox(seed))
    if spec == "uniform-box":
        pts = rng.uniform(-1.0, 1.0, size=(N, n))
    elif spec == "gaussian":
        pts = rng.standard_normal((N, n))
    elif spec == "annulus":
        g = rng.standard_normal((N, n))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
        # radius uniform in volume between 0.5 and 1
        r = (0.5**n + (1 - 0.5**n) * rng.random(N)) ** (1.0 / n)
        pts = g * r[:, None]
    else:  # two-clusters
        centers = np.zeros((2, n))
        centers[0, 0], centers[1, 0] = -1.0, 1.0
        lab = np.arange(N) % 2
        pts = centers[lab] + 0.15 * rng.standard_normal((N, n))
    return PointCloud(pts)


# --------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    cloud = generate(args.spec, args.n, args.N, args.seed, args.k)
    if args.format == "json":
        _emit({"n": cloud.n, "N": cloud.N, "points": cloud.points, "weights": cloud.weights}, args)
    else:
        _emit(None, args, text=cloud_to_csv(cloud))
    return EXIT_OK


def _provenance(args, **more) -> dict:
    d = {"command": args.command, "seed": int(args.seed), "tol": float(args.tol)}
    if getattr(args, "input", None):
        d["input"] = Path(args.input).name
    d["version"] = __version__
    d.update(more)
    return d


def cmd_net(args) -> int:
    cloud = load_cloud(args.input)
    if args.kind == "weak2":
        if args.D not in (None, 2):
            raise InputError("weak2 nets are quadratic; --D must be 2 or omitted")
        cert = weak_net_quadratic(cloud, args.tol, workers=args.workers, approximate=args.approximate)
    else:
        if args.D is None:
            raise InputError("strong nets need --D")
        cert = strong_net(cloud, args.D, args.tol, workers=args.workers, approximate=args.approximate)
    problems = cert.check(cloud)
    out = cert.to_dict()
    out["size"] = cert.size
    out["problems"] = problems
    out["provenance"] = _provenance(args, kind=args.kind)
    _emit(out, args)
    return EXIT_NUMERIC if problems else EXIT_OK


def _net_points(cert: NetCertificate, drop) -> np.ndarray:
    X = cert.net_points
    if drop:
        keep = [i for i in range(X.shape[0]) if i not in set(drop)]
        X = X[keep]
    return X


def cmd_verify(args) -> int:
    cloud = load_cloud(args.input)
    cert = load_certificate(args.certificate)
    if cert.n != cloud.n:
        raise InputError(f"certificate is for n={cert.n} but the cloud has n={cloud.n}")
    X = _net_points(cert, args.drop)
    D = cert.degree if args.D is None else args.D
    if args.mode == "exact":
        rep = exact_min_mass(cloud, X, D, cap=args.exact_cap, tol=args.tol, workers=args.workers)
    else:
        rep = heuristic_min_mass(cloud, X, D, seed=args.seed, iterations=args.iterations, tol=args.tol)
    guarantee = 1.0 / basis_size(cloud.n, D)
    ok = rep.kept_mass >= guarantee - args.tol
    out = rep.to_dict()
    out.update({"guarantee": guarantee, "verified": bool(ok), "net_size": int(X.shape[0]),
                "kept_count": int(len(rep.kept_indices)), "N": cloud.N,
                "worst_poly_text": format_poly(rep.worst_poly),
                "provenance": _provenance(args, mode=args.mode, iterations=args.iterations,
                                          exact_cap=args.exact_cap, dropped=list(args.drop or []))})
    _emit(out, args)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_witness(args) -> int:
    cloud = load_cloud(args.input)
    if args.certificate:
        cert = load_certificate(args.certificate)
        X = _net_points(cert, args.drop)
        D = cert.degree if args.D is None else args.D
    elif args.net:
        X = load_cloud(args.net).points
        D = args.D
    else:
        raise InputError("witness needs --certificate or --net")
    if D is None or D < 2:
        raise InputError("witness needs an even degree --D >= 2")
    rep = witness_report(cloud, X, D // 2, args.tol)
    guarantee = 1.0 / basis_size(cloud.n, 2 * (D // 2))
    out = rep.to_dict()
    out.update({"guarantee": guarantee, "net_size": int(X.shape[0]),
                "kept_count": int(len(rep.kept_indices)),
                "worst_poly_text": format_poly(rep.worst_poly),
                "provenance": _provenance(args, D_half=D // 2)})
    _emit(out, args)
    return EXIT_FAILED if rep.kept_mass < guarantee - args.tol else EXIT_OK


def _parse_point(text: str, n: int) -> np.ndarray:
    try:
        q = np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise InputError(f"cannot parse --point {text!r}") from None
    if q.shape[0] != n:
        raise InputError(f"--point has {q.shape[0]} coordinates, the cloud has {n}")
    return q


def cmd_depth(args) -> int:
    cloud = load_cloud(args.input)
    out = {}
    if args.point:
        q = _parse_point(args.point, cloud.n)
        cert = tukey_depth(q, cloud, tol=args.tol, workers=args.workers, seed=args.seed)
    else:
        res = find_centerpoint(cloud, tol=args.tol, workers=args.workers, approximate=args.approximate)
        cert = res.depth
        out.update({"centerpoint": True, "target": res.target, "intrinsic_dim": res.intrinsic_dim,
                    "num_constraints": res.num_constraints})
    out.update({"point": cert.point, "depth": cert.depth, "exact": cert.exact,
                "witness_normal": cert.witness.normal, "witness_offset": cert.witness.offset,
                "witness_mass": cert.witness.mass, "provenance": _provenance(args)})
    _emit(out, args)
    return EXIT_OK


def cmd_bounds(args) -> int:
    _emit(caratheodory_bounds(args.n, args.k).to_dict(), args)
    return EXIT_OK


def cmd_griddim(args) -> int:
    _emit(grid_vanishing_dimension(args.n, args.k).to_dict(), args)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Philox seed (default 0)")
    common.add_argument("--tol", type=float, default=1e-9, help="numerical tolerance (default 1e-9)")
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (gen defaults to csv, everything else to json)")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--workers", type=int, default=1, help="threads for enumeration scans")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="polynet",
                                description="Nets for polynomial superlevel sets of finite measures.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a synthetic point cloud")
    g.add_argument("spec", help="|".join(GENERATORS))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--N", type=int, default=None)
    g.add_argument("--k", type=int, default=None, help="grid side length")
    g.set_defaults(func=cmd_gen, fmt_default="csv")

    nt = sub.add_parser("net", parents=[common], help="build a weak quadratic or strong degree-D net")
    nt.add_argument("kind", choices=("weak2", "strong"))
    nt.add_argument("--input", required=True)
    nt.add_argument("--D", type=int, default=None)
    nt.add_argument("--approximate", action="store_true",
                    help="allow sampled depth cuts when exact enumeration is too large")
    nt.set_defaults(func=cmd_net)

    v = sub.add_parser("verify", parents=[common], help="search for a polynomial the net misses")
    v.add_argument("--input", required=True)
    v.add_argument("--certificate", required=True)
    v.add_argument("--mode", choices=("exact", "heuristic"), default="exact")
    v.add_argument("--iterations", type=int, default=10_000)
    v.add_argument("--exact-cap", type=int, default=EXACT_CAP)
    v.add_argument("--D", type=int, default=None, help="override the certificate degree")
    v.add_argument("--drop", type=int, action="append", help="drop net point INDEX (repeatable)")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("witness", parents=[common],
                       help="polynomial -Q^2 + eta showing a small set is not a net")
    w.add_argument("--input", required=True)
    w.add_argument("--certificate", default=None)
    w.add_argument("--net", default=None, help="CSV of candidate net points")
    w.add_argument("--D", type=int, default=None, help="even degree (default: certificate degree)")
    w.add_argument("--drop", type=int, action="append")
    w.set_defaults(func=cmd_witness)

    d = sub.add_parser("depth", parents=[common], help="Tukey depth of a point (default: a centerpoint)")
    d.add_argument("--input", required=True)
    d.add_argument("--point", default=None, help="comma-separated coordinates")
    d.add_argument("--approximate", action="store_true")
    d.set_defaults(func=cmd_depth)

    for name, fn, hlp in (("bounds", cmd_bounds, "Caratheodory bound formulas"),
                          ("griddim", cmd_griddim, "grid restriction rank and vanishing dimension")):
        b = sub.add_parser(name, parents=[common], help=hlp)
        b.add_argument("--n", type=int, required=True)
        b.add_argument("--k", type=int, required=True)
        b.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "fmt_default", "json")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CapabilityError as err:
        print(f"polynet: capability limit: {err}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (InputError, DimensionError, DegenerateInputError, BasisOverflowError) as err:
        print(f"polynet: input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (LPIterationError, EigenConvergenceError, NotPSDError, InfeasibleError,
            ArithmeticError) as err:
        print(f"polynet: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as err:
        print(f"polynet: input error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
