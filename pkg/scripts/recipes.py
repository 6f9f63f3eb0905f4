"""Figure-data recipes, each a single ``fermigraph`` invocation.

    python scripts/recipes.py                 # list recipes
    python scripts/recipes.py free-krylov-d3  # run one at full size
    python scripts/recipes.py all --quick     # scaled-down versions of every recipe

Outputs go to ``results/<name>.jsonl`` unless ``--outdir`` says otherwise.
"""
from __future__ import annotations

import argparse
import shlex
import sys
import time
from pathlib import Path

from fermigraph.cli import main as cli

# name -> (full argv, quick argv)
RECIPES = {
    "free-krylov-d3": (
        "free-krylov --d 3 --sizes 10:38:4 --samples 100 --no-dedup --seed 2024",
        "free-krylov --d 3 --sizes 8:14:2 --samples 3 --tpoints 60"),
    "free-krylov-d2": (
        "free-krylov --d 2 --sizes 10:50 --samples all --seed 2024",
        "free-krylov --d 2 --sizes 6:16 --samples all --tpoints 60"),
    "free-entanglement-d2": (
        "free-entanglement --d 2 --sizes 16:128:16 --samples 100 --no-dedup --seed 2024",
        "free-entanglement --d 2 --sizes 8:24:8 --samples 3 --no-dedup --tpoints 40"),
    "free-entanglement-d3": (
        "free-entanglement --d 3 --sizes 16:128:16 --samples 100 --no-dedup --seed 2024",
        "free-entanglement --d 3 --sizes 8:24:8 --samples 3 --no-dedup --tpoints 40"),
    "int-entanglement-d3": (
        "int-entanglement --d 3 --sizes 6:14:2 --samples 20 --seed 2024",
        "int-entanglement --d 3 --sizes 6:8:2 --samples 2 --tpoints 30"),
    "int-krylov-d3": (
        "int-krylov --d 3 --sizes 4:8:2 --samples all",
        "int-krylov --d 3 --sizes 4:6:2 --samples all --tpoints 60"),
    "dimension-int-d2": (
        "dimension --d 2 --interacting --sizes 4:10 --samples all",
        "dimension --d 2 --interacting --sizes 4:7 --samples all"),
    "dimension-int-d3": (
        "dimension --d 3 --interacting --sizes 4:8:2 --samples all",
        "dimension --d 3 --interacting --sizes 4:6:2 --samples all"),
    "loop-dimension": (
        "dimension --d 2 --single-loop --sizes 4:40",
        "dimension --d 2 --single-loop --sizes 4:12"),
    "otoc-free-d2": (
        "otoc --d 2 --n 20 --samples all --seed 11",
        "otoc --d 2 --n 12 --samples all --tpoints 41"),
    "otoc-free-d3": (
        "otoc --d 3 --n 20 --samples 40 --seed 11",
        "otoc --d 3 --n 12 --samples 3 --tpoints 41"),
    "otoc-int-d3": (
        "otoc --interacting --d 3 --n 14 --samples 12 --vectors 8 --method typicality --seed 5",
        "otoc --interacting --d 3 --n 8 --samples 2 --tpoints 41"),
    "theory": ("theory --nmax 200", "theory --nmax 40"),
}


def run(name: str, quick: bool, outdir: Path) -> int:
    argv = shlex.split(RECIPES[name][1 if quick else 0])
    suffix = ".csv" if argv[0] == "theory" else ".jsonl"
    out = outdir / f"{name}{'-quick' if quick else ''}{suffix}"
    t0 = time.time()
    code = cli(argv + ["--output", str(out)])
    print(f"{name}: exit {code}, {time.time() - t0:.1f}s -> {out}")
    return code


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("name", nargs="?", help="recipe name or 'all'")
    p.add_argument("--quick", action="store_true", help="scaled-down sizes")
    p.add_argument("--outdir", default="results")
    args = p.parse_args(argv)
    if args.name is None:
        for k, (full, _) in RECIPES.items():
            print(f"{k:22s} fermigraph {full}")
        return 0
    names = list(RECIPES) if args.name == "all" else [args.name]
    unknown = [n for n in names if n not in RECIPES]
    if unknown:
        p.error(f"unknown recipe {unknown[0]!r}")
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return max(run(n, args.quick, outdir) for n in names)


if __name__ == "__main__":
    sys.exit(main())
