"""Command-line harness.

Subcommands: ``solve`` (batched shifted systems), ``invit`` (inverse-
iteration eigenvectors), ``bench`` (runtime decomposition / flop counters /
backend comparison), ``verify`` (property suite), ``gen`` (write test
matrices).  CSV schemas are versioned via the leading ``schema`` column;
header names are a stable contract.  Exit codes: 0 success, 1 numerical
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import _kernels
from .backsolve import chsrq3, dhsrq3
from .core import ConfigError, HessrqError, read_matrix, write_matrix
from .inviter import InviterConfig, hsrq3in
from .reference import henry_rq_solve, hessenberg_lu_invit
from .scheduler import RunStats
from .testprob import gen_h1, gen_h2, gen_h3
from .verifysuite import run_verify

SOLVE_SCHEMA = "hessrq-solve-v1"
INVIT_SCHEMA = "hessrq-invit-v1"
BENCH_SCHEMA = "hessrq-bench-v1"
TASK_TYPES = ("ReduceDiag", "ReduceOffdiag", "Solve", "Update", "Backtransform")


def _parse_kv(spec):
    out = {}
    if spec:
        for part in spec.split(","):
            if not part:
                continue
            key, _, val = part.partition("=")
            out[key.strip()] = val.strip()
    return out


def load_matrix(spec):
    """Matrix from a file path or a generator spec like ``h1:n=64,seed=3``.

    Returns (HessenbergMatrix, eigenvalues-or-None).
    """
    kind, _, rest = spec.partition(":")
    if kind in ("h1", "h2", "h3"):
        kv = _parse_kv(rest)
        n = int(kv.get("n", "64"))
        if kind == "h1":
            h, eigs = gen_h1(
                n, float(kv.get("complex", "0")), seed=int(kv.get("seed", "0"))
            )
            return h, eigs
        if kind == "h2":
            return gen_h2(n), None
        return gen_h3(n), None
    if not os.path.exists(spec):
        raise ConfigError(f"matrix source {spec!r}: no such file or generator")
    return read_matrix(spec), None


def _parse_scalar(tok):
    tok = tok.strip().replace("i", "j")
    try:
        v = complex(tok)
    except ValueError as exc:
        raise ConfigError(f"cannot parse shift {tok!r}") from exc
    return v


def load_shifts(spec, h):
    """Shifts from ``gen:...``, a file of "re [im]" lines, or a comma list."""
    if spec.startswith("gen:"):
        kv = _parse_kv(spec[4:])
        count = int(kv.get("count", "8"))
        kind = kv.get("kind", "real")
        seed = int(kv.get("seed", "1"))
        radius = float(kv.get("radius", "1.5"))
        rng = np.random.default_rng(seed)
        scale = radius * h.infinity_norm()
        if kind == "real":
            return scale * rng.uniform(1.0, 2.0, count) * rng.choice([-1.0, 1.0], count)
        if kind == "complex":
            ang = rng.uniform(0.15, np.pi - 0.15, count)
            rad = scale * rng.uniform(1.0, 2.0, count)
            return rad * np.exp(1j * ang)
        raise ConfigError(f"unknown shift kind {kind!r}")
    if os.path.exists(spec):
        vals = []
        with open(spec) as f:
            for line in f:
                parts = line.split()
                if not parts:
                    continue
                if len(parts) == 1:
                    vals.append(_parse_scalar(parts[0]))
                else:
                    vals.append(complex(float(parts[0]), float(parts[1])))
        arr = np.array(vals)
    else:
        arr = np.array([_parse_scalar(t) for t in spec.split(",") if t.strip()])
    if arr.size == 0:
        raise ConfigError("empty shift list")
    if np.all(arr.imag == 0.0):
        return arr.real.astype(np.float64)
    return arr.astype(np.complex128)


def load_rhs(spec, n, m, cplx):
    dtype = np.complex128 if cplx else np.float64
    if spec.startswith("ones"):
        _, _, scale = spec.partition(":")
        rho = float(scale) if scale else 1.0
        return rho * np.ones((n, m), dtype=dtype)
    if os.path.exists(spec):
        vals = np.loadtxt(spec, dtype=np.float64).ravel()
        if vals.size == n:
            return np.repeat(vals[:, None], m, axis=1).astype(dtype)
        if vals.size == n * m:
            return vals.reshape(n, m).astype(dtype)
        raise ConfigError(f"rhs file has {vals.size} values, expected {n} or {n * m}")
    raise ConfigError(f"rhs source {spec!r}: no such file (use ones / ones:SCALE / path)")


def _shifted_norm_inf(hd, lam):
    a = hd.astype(np.complex128) if np.iscomplexobj(np.asarray(lam)) else hd.copy()
    a = a - lam * np.eye(hd.shape[0], dtype=a.dtype)
    return float(np.max(np.sum(np.abs(a), axis=1)))


def _write_rows(path, header, rows):
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(header)
        w.writerows(rows)
    finally:
        if path:
            out.close()


def _workers_arg(value):
    if value is None:
        return os.cpu_count() or 1
    return int(value)


def cmd_solve(args):
    h, _ = load_matrix(args.matrix)
    shifts = load_shifts(args.shifts, h)
    cplx = np.iscomplexobj(shifts)
    m = shifts.shape[0]
    n = h.n
    rhs = load_rhs(args.rhs, n, m, cplx)
    workers = _workers_arg(args.workers)
    robust = args.robust == "on"
    t0 = time.perf_counter()
    if args.solver == "tiled":
        fn = chsrq3 if cplx else dhsrq3
        res = fn(
            h, shifts, rhs, b_r=min(args.tile_rows, n), b_c=args.batch,
            workers=workers, robust=robust,
        )
        x, alpha = res.x, res.alpha
    elif args.solver == "henry":
        x = henry_rq_solve(h, shifts, rhs)
        alpha = np.ones(m)
    elif args.solver == "lu":
        cols = []
        alpha = np.empty(m)
        for l in range(m):
            xl, al = hessenberg_lu_invit(h, shifts[l], rhs[:, l])
            cols.append(xl)
            alpha[l] = al
        x = np.stack(cols, axis=1)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown solver {args.solver}")
    elapsed = time.perf_counter() - t0

    if not np.all(np.isfinite(x if not cplx else np.abs(x))):
        print(
            "error: solution contains non-finite values "
            "(overflow; retry with --robust on)",
            file=sys.stderr,
        )
        return 1

    rows = []
    for l in range(m):
        lam = shifts[l]
        denom = _shifted_norm_inf(h.data, lam) * max(np.max(np.abs(x[:, l])), 1e-300)
        resid = float(
            np.max(np.abs((h.data @ x[:, l] - lam * x[:, l]) - alpha[l] * rhs[:, l]))
            / denom
        )
        rows.append(
            [
                SOLVE_SCHEMA,
                args.solver,
                args.robust,
                n,
                args.tile_rows,
                args.batch,
                workers,
                l,
                float(np.real(lam)),
                float(np.imag(lam)),
                float(alpha[l]),
                resid,
                elapsed,
            ]
        )
    _write_rows(
        args.out,
        [
            "schema", "solver", "robust", "n", "b_r", "b_c", "workers",
            "shift_index", "shift_re", "shift_im", "alpha", "residual", "run_time_s",
        ],
        rows,
    )
    return 0


def _select_eigs(token, eigs, parser):
    if token.startswith("file:"):
        path = token[5:]
        vals = []
        with open(path) as f:
            for line in f:
                parts = line.split()
                if not parts:
                    continue
                if len(parts) == 1:
                    vals.append(_parse_scalar(parts[0]))
                else:
                    vals.append(complex(float(parts[0]), float(parts[1])))
        return np.array(vals, dtype=np.complex128)
    if eigs is None:
        parser.error("matrix source carries no eigenvalues; use --select file:PATH")
    if token == "all":
        return eigs[(eigs.imag == 0) | (eigs.imag > 0)]
    if token == "real":
        sel = eigs[eigs.imag == 0]
        if sel.size == 0:
            parser.error("selection 'real' is empty for this matrix")
        return sel
    if token == "complex":
        sel = eigs[eigs.imag > 0]
        if sel.size == 0:
            parser.error("selection 'complex' is empty for this matrix")
        return sel
    parser.error(f"unknown selection {token!r} (all|real|complex|file:PATH)")


def cmd_invit(args, parser):
    h, eigs = load_matrix(args.matrix)
    sel = _select_eigs(args.select, eigs, parser)
    workers = _workers_arg(args.workers)
    cfg = InviterConfig(
        w_max=args.wmax,
        b_r=min(args.tile_rows, h.n),
        b_c=args.batch,
        max_restarts=args.max_restarts,
        workers=workers,
    )
    t0 = time.perf_counter()
    res = hsrq3in(h, sel, cfg)
    elapsed = time.perf_counter() - t0
    hnorm = h.infinity_norm()
    rows = []
    for l in range(sel.size):
        lam = sel[l]
        x = res.vectors[:, l]
        resid = float(np.linalg.norm(h.data @ x - lam * x) / hnorm)
        rows.append(
            [
                INVIT_SCHEMA,
                h.n,
                cfg.b_r,
                cfg.b_c,
                workers,
                l,
                float(lam.real),
                float(lam.imag),
                int(res.converged[l]),
                int(res.restarts[l]),
                resid,
                elapsed,
            ]
        )
    _write_rows(
        args.out,
        [
            "schema", "n", "b_r", "b_c", "workers", "index", "eig_re", "eig_im",
            "converged", "restarts", "residual_rel", "run_time_s",
        ],
        rows,
    )
    return 0 if res.converged.all() else 1


def cmd_bench(args):
    h, _ = load_matrix(args.matrix)
    n = h.n
    shifts = load_shifts(
        f"gen:count={args.shift_count},kind={args.kind},seed=2,radius=1.5", h
    )
    cplx = np.iscomplexobj(shifts)
    rhs = load_rhs("ones", n, shifts.shape[0], cplx)
    backends = (
        _kernels.available_backends() if args.backend == "both" else [_kernels.backend_name()]
    )
    robust_modes = [True, False] if args.robust == "both" else [args.robust == "on"]
    worker_list = [int(w) for w in str(args.workers).split(",")]

    header = (
        ["schema", "backend", "n", "m", "kind", "b_r", "b_c", "workers", "robust"]
        + list(TASK_TYPES)
        + ["total_s"]
        + [f"flops_{t}" for t in TASK_TYPES]
        + [f"formula_{t}" for t in TASK_TYPES]
        + ["henry_s"]
    )
    rows = []
    prev = _kernels.backend_name()
    try:
        for backend in backends:
            _kernels.set_backend(backend)
            for workers in worker_list:
                for robust in robust_modes:
                    stats = RunStats()
                    fn = chsrq3 if cplx else dhsrq3
                    t0 = time.perf_counter()
                    fn(
                        h, shifts, rhs,
                        b_r=min(args.tile_rows, n), b_c=args.batch,
                        workers=workers, robust=robust, stats=stats,
                    )
                    total = time.perf_counter() - t0
                    henry_s = ""
                    if args.compare_henry:
                        t1 = time.perf_counter()
                        henry_rq_solve(h, shifts, rhs)
                        henry_s = time.perf_counter() - t1
                    rows.append(
                        [
                            BENCH_SCHEMA, backend, n, shifts.shape[0],
                            "complex" if cplx else "real",
                            args.tile_rows, args.batch, workers,
                            "on" if robust else "off",
                        ]
                        + [stats.seconds.get(t, 0.0) for t in TASK_TYPES]
                        + [total]
                        + [stats.flops.get(t, 0.0) for t in TASK_TYPES]
                        + [stats.formula.get(t, 0.0) for t in TASK_TYPES]
                        + [henry_s]
                    )
                    if args.compare_henry and henry_s != "":
                        faster = total <= henry_s
                        print(
                            f"# smoke: tiled {total:.3f}s vs per-shift single-sweep "
                            f"{henry_s:.3f}s -> tiled {'<=' if faster else '>'} baseline "
                            f"(backend={backend}, workers={workers})",
                            file=sys.stderr,
                        )
    finally:
        _kernels.set_backend(prev)
    _write_rows(args.out, header, rows)
    return 0


def cmd_verify(args):
    passed, report = run_verify(quick=args.quick, corrupt_givens=args.corrupt_givens)
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"{status} {check['name']}: {check['detail']}")
    if args.report:
        with open(args.report, "w") as f:
            json.dump(report, f, indent=2)
    return 0 if passed else 1


def cmd_gen(args):
    if args.kind == "h1":
        h, eigs = gen_h1(args.n, args.complex_fraction, seed=args.seed)
        if args.eigvals:
            with open(args.eigvals, "w") as f:
                for v in eigs:
                    f.write(f"{v.real!r} {v.imag!r}\n")
    elif args.kind == "h2":
        h = gen_h2(args.n)
    else:
        h = gen_h3(args.n)
    write_matrix(args.out, h, fmt=args.format)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hessrq", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve (H - lam_l I) x_l = alpha_l b_l for a batch")
    ps.add_argument("--matrix", required=True, help="file path or h1:/h2:/h3: generator spec")
    ps.add_argument("--shifts", required=True, help="file, comma list, or gen:count=..,kind=..")
    ps.add_argument("--rhs", default="ones", help="ones | ones:SCALE | file")
    ps.add_argument("--tile-rows", type=int, default=128, dest="tile_rows")
    ps.add_argument("--batch", type=int, default=32)
    ps.add_argument("--workers", type=int, default=None)
    ps.add_argument("--solver", choices=("tiled", "henry", "lu"), default="tiled")
    ps.add_argument("--robust", choices=("on", "off"), default="on")
    ps.add_argument("--out", default=None, help="CSV output path (default stdout)")

    pi = sub.add_parser("invit", help="inverse-iteration eigenvectors")
    pi.add_argument("--matrix", required=True)
    pi.add_argument("--select", default="all", help="all | real | complex | file:PATH")
    pi.add_argument("--wmax", type=int, default=None, help="cross-over workspace cap (reals)")
    pi.add_argument("--tile-rows", type=int, default=128, dest="tile_rows")
    pi.add_argument("--batch", type=int, default=32)
    pi.add_argument("--workers", type=int, default=None)
    pi.add_argument("--max-restarts", type=int, default=3, dest="max_restarts")
    pi.add_argument("--out", default=None)

    pb = sub.add_parser("bench", help="runtime decomposition and flop counters")
    pb.add_argument("--matrix", default="h1:n=1024,complex=0,seed=1")
    pb.add_argument("--shift-count", type=int, default=64, dest="shift_count")
    pb.add_argument("--kind", choices=("real", "complex"), default="real")
    pb.add_argument("--tile-rows", type=int, default=128, dest="tile_rows")
    pb.add_argument("--batch", type=int, default=32)
    pb.add_argument("--workers", default="1", help="comma list for a strong-scaling sweep")
    pb.add_argument("--backend", choices=("active", "both"), default="active")
    pb.add_argument("--robust", choices=("on", "off", "both"), default="on")
    pb.add_argument("--compare-henry", action="store_true", dest="compare_henry")
    pb.add_argument("--out", default=None)

    pv = sub.add_parser("verify", help="run the property suite")
    pv.add_argument("--quick", action="store_true", help="<=10 second subset")
    pv.add_argument("--report", default=None, help="write a JSON failure report")
    pv.add_argument(
        "--corrupt-givens", action="store_true", dest="corrupt_givens",
        help=argparse.SUPPRESS,  # test hook: break a rotation before checking
    )

    pg = sub.add_parser("gen", help="write a generated test matrix")
    pg.add_argument("--kind", choices=("h1", "h2", "h3"), required=True)
    pg.add_argument("--n", type=int, required=True)
    pg.add_argument("--complex-fraction", type=float, default=0.0, dest="complex_fraction")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--out", required=True)
    pg.add_argument("--format", choices=("bin", "text"), default="bin")
    pg.add_argument("--eigvals", default=None, help="also write the eigenvalues (h1)")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "invit":
            return cmd_invit(args, parser)
        if args.command == "bench":
            return cmd_bench(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "gen":
            return cmd_gen(args)
    except ConfigError as exc:
        parser.error(str(exc))
    except HessrqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
