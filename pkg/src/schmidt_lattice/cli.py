"""Command-line front end.

    schmidt-lattice schmidt --isotropic d=3 lambda=0.9 --seed 42
    schmidt-lattice sweep --d 3 --f gap --out sweep.csv
    schmidt-lattice lorenz --state bell.json
    schmidt-lattice replay run.manifest.json

Exit codes: 0 success, 2 bad input, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .ensemble import THREADS_ENV, OptimizerConfig
from .majorization import BUILTIN_NAMES, LorenzCurve, builtin_f, lorenz_eval
from .quantum import DensityMatrix
from .schmidt import SchmidtResult, convex_roof_search, monotone_nu, schmidt_vector, top_monotone_search
from .states import StateSpec

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3
PAPER_GRID = tuple(round(0.05 * k, 2) for k in range(21))
LORENZ_SAMPLES = 101


class InputError(Exception):
    pass


def fmt(x) -> str:
    """12 significant digits, '.' decimal, no locale."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return format(float(x), ".12g")


def write_csv(rows: list[list], header: list[str], out: Optional[str]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# --- argument handling ----------------------------------------------------------


def _keyvals(tokens) -> dict:
    out = {}
    for tok in tokens or []:
        if "=" not in tok:
            raise InputError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k.strip().lower()] = v.strip()
    return out


def _parse_grid(text: str) -> list[float]:
    text = text.strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"bad grid {text!r}: {exc}") from None


def _state_spec(args) -> StateSpec:
    """Build the StateSpec named by the source flags."""
    sources = [s for s in ("isotropic", "state", "separable", "max_entangled", "random_mixed") if getattr(args, s) is not None]
    if len(sources) > 1:
        raise InputError("choose one state source")
    source = sources[0] if sources else "isotropic"
    kv = {} if source == "state" else _keyvals(getattr(args, source))
    try:
        d = int(kv.get("d", args.d)) if kv.get("d", args.d) is not None else None
        lam = kv.get("lambda", kv.get("lam", args.lam))
        lam = float(lam) if lam is not None else None
        dims = None
        if "da" in kv or "db" in kv or args.dims:
            dA, dB = (int(kv["da"]), int(kv["db"])) if "da" in kv else args.dims
            dims = (dA, dB)
        seed = int(kv.get("seed", args.state_seed if args.state_seed is not None else args.seed))
        k = int(kv.get("k", kv.get("components", args.components)))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None
    try:
        if source == "state":
            return StateSpec("from_file", path=args.state)
        if source == "isotropic":
            return StateSpec("isotropic", d=d or 3, lam=lam)
        if source == "max_entangled":
            return StateSpec("max_entangled", d=d or 2)
        if source == "separable":
            return StateSpec("separable_mixture", d=d or 2, dims=dims, components=k, seed=seed)
        return StateSpec("random_mixed", d=d or 2, dims=dims, seed=seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _build_state(spec: StateSpec) -> DensityMatrix:
    try:
        return spec.build()
    except FileNotFoundError as exc:
        raise InputError(f"cannot read state file: {exc}") from None
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"invalid state: {exc}") from None


def _config(args) -> OptimizerConfig:
    try:
        return OptimizerConfig(
            starts=args.starts, max_iters=args.max_iters, tol=args.tol,
            seed=args.seed, M=args.M, method=args.method,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _digest(rho: DensityMatrix) -> str:
    h = hashlib.sha256()
    h.update(np.asarray(rho.dims, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(rho.matrix).tobytes())
    return h.hexdigest()


def _default_sidecar(out: Optional[str], suffix: str) -> Optional[str]:
    return None if not out else str(Path(out).with_suffix(suffix))


def _write_manifest(args, argv, cfg: OptimizerConfig, digests, started: float) -> None:
    path = args.manifest or _default_sidecar(args.out, ".manifest.json")
    if not path:
        return
    manifest = {
        "command": args.command,
        "argv": list(argv),
        "config": {
            "M": cfg.M, "starts": cfg.starts, "max_iters": cfg.max_iters, "tol": cfg.tol,
            "seed": cfg.seed, "method": cfg.method, "spread": cfg.spread,
            "support_eps": args.support_eps,
        },
        "input_digest": digests,
        "tool_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "threads": os.environ.get(THREADS_ENV, ""),
        "wall_clock_seconds": round(time.time() - started, 3),
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")


def _warn_unconverged(where: str) -> None:
    print(f"warning: optimizer hit its iteration budget ({where})", file=sys.stderr)


# --- commands ------------------------------------------------------------------


def cmd_schmidt(args, argv) -> int:
    started = time.time()
    cfg = _config(args)
    rho = _build_state(_state_spec(args))
    res = schmidt_vector(rho, cfg, args.support_eps)
    d = res.d
    header = [f"nu_{i}" for i in range(1, d + 1)] + [f"S_{j}" for j in range(1, d)] + [
        "rank", "support_eps", "converged", "pure_bypass",
    ]
    row = [*res.nu.entries, *res.S, res.rank, res.support_eps, res.converged, res.pure_bypass]
    write_csv([row], header, args.out)
    report_path = args.report or _default_sidecar(args.out, ".json")
    if report_path:
        Path(report_path).write_text(json.dumps(_result_json(res), indent=2) + "\n")
    if not res.converged:
        _warn_unconverged("schmidt")
    _write_manifest(args, argv, cfg, _digest(rho), started)
    return EXIT_OK


def _result_json(res: SchmidtResult) -> dict:
    return {
        "nu": [float(x) for x in res.nu.entries],
        "S": [float(x) for x in res.S],
        "envelope_vertices": [[int(j), float(y)] for j, y in res.envelope_vertices],
        "rank": res.rank,
        "support_eps": res.support_eps,
        "pure_bypass": res.pure_bypass,
        "converged": res.converged,
        "diagnostics": [r.as_dict() for r in res.diagnostics],
    }


def sweep_rows(d: int, grid, f_name: str, cfg: OptimizerConfig, support_eps=None, measures=("nu", "cr", "top")):
    """One row per lambda: nu, rank, E_nu, E_cr, E_top and convergence flags."""
    f = builtin_f(f_name)
    rows, digests = [], []
    for lam in grid:
        rho = _build_state(StateSpec("isotropic", d=d, lam=lam))
        digests.append(_digest(rho))
        res = schmidt_vector(rho, cfg, support_eps)
        e_nu = monotone_nu(f, rho, result=res)
        e_cr = e_top = None
        ok_cr = ok_top = None
        if "cr" in measures:
            e_cr, _, rep = convex_roof_search(f, rho, cfg)
            ok_cr = rep is None or rep.converged
        if "top" in measures:
            e_top, _, rep = top_monotone_search(f, rho, cfg)
            ok_top = rep is None or rep.converged
        rows.append([lam, *res.nu.entries, res.rank, e_nu, e_cr, e_top, res.converged, ok_cr, ok_top])
    header = ["lambda", *[f"nu_{i}" for i in range(1, d + 1)], "rank", "E_nu_f", "E_cr_f", "E_top_f",
              "converged_nu", "converged_cr", "converged_top"]
    return header, rows, digests


def cmd_sweep(args, argv) -> int:
    started = time.time()
    cfg = _config(args)
    grid = _parse_grid(args.grid) if args.grid else list(PAPER_GRID)
    if any(not 0.0 <= x <= 1.0 for x in grid):
        raise InputError("grid values must lie in [0, 1]")
    d = int(args.d or 3)
    if d < 2:
        raise InputError("d must be at least 2")
    measures = tuple(m.strip() for m in args.measures.split(",") if m.strip())
    if any(m not in ("nu", "cr", "top") for m in measures):
        raise InputError(f"unknown measure in {args.measures!r}")
    header, rows, digests = sweep_rows(d, grid, args.f, cfg, args.support_eps, measures)
    write_csv(rows, header, args.out)
    if any(flag is False for r in rows for flag in r[-3:]):
        _warn_unconverged("sweep")
    _write_manifest(args, argv, cfg, digests, started)
    return EXIT_OK


def lorenz_samples(res: SchmidtResult, n: int = LORENZ_SAMPLES) -> list[tuple[float, float]]:
    curve = LorenzCurve.of(res.nu)
    xs = np.linspace(0.0, curve.d, n)
    return [(float(x), lorenz_eval(curve, float(x))) for x in xs]


def cmd_lorenz(args, argv) -> int:
    started = time.time()
    cfg = _config(args)
    rho = _build_state(_state_spec(args))
    res = schmidt_vector(rho, cfg, args.support_eps)
    write_csv([list(p) for p in lorenz_samples(res)], ["x", "L"], args.out)
    if not res.converged:
        _warn_unconverged("lorenz")
    _write_manifest(args, argv, cfg, _digest(rho), started)
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    try:
        manifest = json.loads(Path(args.manifest_file).read_text())
        old = list(manifest["argv"])
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"cannot read manifest: {exc}") from None
    return main(old)


# --- parser --------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, sweep: bool = False) -> None:
    src = p.add_argument_group("state")
    if not sweep:
        src.add_argument("--isotropic", nargs="*", metavar="KEY=VALUE", help="isotropic state, e.g. d=3 lambda=0.9")
        src.add_argument("--state", metavar="PATH", help="JSON state file")
        src.add_argument("--separable", nargs="*", metavar="KEY=VALUE", help="random separable mixture (d, k, seed)")
        src.add_argument("--max-entangled", dest="max_entangled", nargs="*", metavar="KEY=VALUE")
        src.add_argument("--random-mixed", dest="random_mixed", nargs="*", metavar="KEY=VALUE")
        src.add_argument("--lambda", dest="lam", type=float)
        src.add_argument("--dims", type=int, nargs=2, metavar=("DA", "DB"))
        src.add_argument("--components", type=int, default=4)
        src.add_argument("--state-seed", type=int)
    src.add_argument("--d", type=int)
    opt = p.add_argument_group("optimizer")
    opt.add_argument("--M", type=int, help="ensemble size (default r^2+1)")
    opt.add_argument("--starts", type=int, default=OptimizerConfig.starts)
    opt.add_argument("--max-iters", type=int, default=OptimizerConfig.max_iters)
    opt.add_argument("--tol", type=float, default=OptimizerConfig.tol)
    opt.add_argument("--method", choices=("lbfgs", "nelder-mead"), default=OptimizerConfig.method)
    opt.add_argument("--seed", type=int, default=0)
    opt.add_argument("--support-eps", type=float)
    p.add_argument("--out", metavar="PATH", help="CSV output (stdout if omitted)")
    p.add_argument("--manifest", metavar="PATH", help="run manifest (default: next to --out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schmidt-lattice", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schmidt", help="Schmidt vector, partial sums and rank of one state")
    _add_common(p)
    p.add_argument("--report", metavar="PATH", help="JSON report (default: next to --out)")
    p.set_defaults(func=cmd_schmidt)

    p = sub.add_parser("sweep", help="isotropic-family sweep over lambda")
    _add_common(p, sweep=True)
    p.add_argument("--grid", help="comma list or start:stop:num (default: 0, 0.05, ..., 1)")
    p.add_argument("--f", choices=BUILTIN_NAMES, default="gap")
    p.add_argument("--measures", default="nu,cr,top", help="subset of nu,cr,top")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lorenz", help="Lorenz curve of the Schmidt vector on 101 points")
    _add_common(p)
    p.set_defaults(func=cmd_lorenz)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest_file")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
