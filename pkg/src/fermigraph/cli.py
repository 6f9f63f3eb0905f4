"""Command-line entry point: ``fermigraph <subcommand> [flags]``.

Exit codes: 0 on success, 1 on a usage error, 2 on a runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import ensemble
from .theory import scaling_fit, theory_table

SUBCOMMANDS = ("free-entanglement", "free-krylov", "int-entanglement", "int-krylov",
               "otoc", "dimension", "theory", "fit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_sizes(text: str) -> list[int]:
    """``a:b:step`` (inclusive) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise argparse.ArgumentTypeError(f"bad size range {text!r}")
        a, b = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
        if step <= 0 or b < a:
            raise argparse.ArgumentTypeError(f"bad size range {text!r}")
        return list(range(a, b + 1, step))
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}")


def _samples(text: str):
    if text == "all":
        return "all"
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("samples must be an integer or 'all'")
    if v < 1:
        raise argparse.ArgumentTypeError("samples must be >= 1")
    return v


def _window(text: str):
    try:
        a, b = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("window must be t0:t1")
    return (a, b)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fermigraph", description="Krylov complexity and entanglement of "
                "fermions on regular graphs.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--output", "-o", help="output path (default: stdout)")
        s.add_argument("--format", choices=("csv", "jsonl"), default=None)
        s.add_argument("--config", help="JSON or YAML file whose keys mirror ExperimentConfig")
        s.add_argument("-v", "--verbose", action="store_true")
        if name == "theory":
            s.add_argument("--nmax", type=int, default=120)
            s.add_argument("--nmin", type=int, default=3)
            continue
        if name == "fit":
            s.add_argument("--input", required=True, help="CSV with N,mean columns or JSONL records")
            s.add_argument("--model", choices=("loglog", "log4_vs_logN"), default="loglog")
            s.add_argument("--nmin", type=float, default=None)
            s.add_argument("--nmax", type=float, default=None)
            continue
        s.add_argument("--d", type=int, choices=(2, 3), dest="degree")
        g = s.add_mutually_exclusive_group()
        g.add_argument("--sizes", type=parse_sizes)
        g.add_argument("--n", type=int)
        s.add_argument("--samples", type=_samples)
        s.add_argument("--j", type=float)
        s.add_argument("--tmax", type=float)
        s.add_argument("--tmin", type=float)
        s.add_argument("--tpoints", type=int)
        s.add_argument("--tscale", choices=("log", "lin"))
        s.add_argument("--seed", type=int)
        s.add_argument("--tol", type=float)
        s.add_argument("--disorder", type=float, dest="disorder_w")
        s.add_argument("--interacting", action="store_true", default=None)
        s.add_argument("--workers", type=int)
        s.add_argument("--raw", action="store_true", default=None)
        s.add_argument("--backend", choices=("measure", "lanczos"))
        s.add_argument("--max-dim", type=int, dest="max_dim")
        s.add_argument("--no-dedup", action="store_false", default=None, dest="dedup",
                       help="keep isomorphic repeats among sampled graphs")
        s.add_argument("--single-loop", action="store_true", default=None, dest="single_loop",
                       help="d=2 only: use the single N-site loop")
        if name == "otoc":
            s.add_argument("--trace", choices=("full", "half"), dest="otoc_trace")
            s.add_argument("--method", choices=("auto", "exact", "typicality"), dest="otoc_method")
            s.add_argument("--vectors", type=int, dest="otoc_samples",
                           help="random vectors for the typicality trace")
            s.add_argument("--window", type=_window, dest="lyapunov_window",
                           help="explicit Lyapunov fit range t0:t1")
    return p


def _load_config(path) -> dict:
    text = Path(path).read_text()
    if str(path).endswith((".yaml", ".yml")):
        import yaml

        return yaml.safe_load(text) or {}
    return json.loads(text)


_CFG_KEYS = {f for f in ensemble.ExperimentConfig.__dataclass_fields__}


def resolve_config(args, kind: str) -> ensemble.ExperimentConfig:
    values = {}
    if args.config:
        values.update({k: v for k, v in _load_config(args.config).items() if k in _CFG_KEYS})
    if "seed" not in values and os.environ.get("KRYLOV_SEED"):
        try:
            values["seed"] = int(os.environ["KRYLOV_SEED"])
        except ValueError:
            raise UsageError("KRYLOV_SEED must be an integer")
    for key in _CFG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.n is not None:
        values["sizes"] = [args.n]
    values["kind"] = kind
    if not values.get("sizes"):
        raise UsageError("give --sizes a:b:step or --n N")
    try:
        return ensemble.ExperimentConfig(**values)
    except (TypeError, ValueError) as err:
        raise UsageError(str(err))


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _theory_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "count", "d_free", "log4_d_int_upper", "loop_avg"])
    for r in rows:
        w.writerow([r.n, r.count, repr(r.d_free), repr(r.log4_d_int_upper), repr(r.loop_avg)])
    return buf.getvalue()


def _read_points(path):
    text = Path(path).read_text()
    if path.endswith(".jsonl"):
        recs = [json.loads(ln) for ln in text.splitlines() if ln.strip()]
        return [(r["N"], r["mean"]) for r in recs]
    rows = list(csv.DictReader(io.StringIO(text)))
    return [(float(r["N"]), float(r["mean"])) for r in rows]


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(SUBCOMMANDS))
    except UsageError as err:
        print(err, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "theory":
            if args.nmax < 3 or args.nmin > args.nmax:
                raise UsageError("need 3 <= nmin <= nmax")
            _emit(_theory_csv(theory_table(args.nmax, args.nmin)), args.output)
            return 0
        if args.command == "fit":
            pts = _read_points(args.input)
            pts = [p for p in pts if (args.nmin is None or p[0] >= args.nmin)
                   and (args.nmax is None or p[0] <= args.nmax)]
            fit = scaling_fit([p[0] for p in pts], [p[1] for p in pts], model=args.model)
            _emit(json.dumps(dict(exponent=fit.exponent, prefactor=fit.prefactor,
                                  stderr=fit.stderr, model=fit.model, points=len(pts)),
                             sort_keys=True) + "\n", args.output)
            return 0
        cfg = resolve_config(args, args.command)
        records = ensemble.run_experiment(cfg)
        fmt = args.format or ("csv" if (args.output or "").endswith(".csv") else "jsonl")
        text = ensemble.records_to_csv(records) if fmt == "csv" else ensemble.records_to_jsonl(records)
        _emit(text, args.output)
        return 0
    except UsageError as err:
        print(err, file=sys.stderr)
        return 1
    except Exception as err:  # runtime failure
        print(f"fermigraph: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
