"""Command-line entry point: train, generate, evaluate, benchmark, baseline, render.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from pcgnn.config import ConfigError, RunConfig
from pcgnn.directga import directga_evolve
from pcgnn.generator import Generator
from pcgnn.metrics import (MetricReport, astar_difficulty, benchmark_generation, evaluate_levels,
                           leniency, write_timing_csv)
from pcgnn.neat import load_genome, save_genome
from pcgnn.solvers import solve, write_trajectory_csv
from pcgnn.tilemap import LevelFormatError, read_level, tileset_for, write_level, write_pgm
from pcgnn.training import train

log = logging.getLogger("pcgnn")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

# text files our own commands write next to levels
_RUN_ARTIFACTS = {"genome.txt", "resolved_config.txt"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_sizes(text: str) -> list[tuple[int, int]]:
    sizes = []
    for part in text.split(","):
        part = part.strip().lower()
        try:
            if "x" in part:
                w, h = (int(v) for v in part.split("x", 1))
            else:
                w = h = int(part)
        except ValueError:
            raise UsageError(f"invalid size {part!r} in --sizes") from None
        if w < 2 or h < 2:
            raise UsageError(f"size {part!r} is smaller than 2x2")
        sizes.append((w, h))
    if not sizes:
        raise UsageError("--sizes is empty")
    return sizes


def _parse_ints(text: str, flag: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"invalid integer list for {flag}: {text!r}") from None
    if not values or min(values) < 0:
        raise UsageError(f"{flag} needs nonnegative integers")
    return values


def _resolve_config(args) -> RunConfig:
    text = None
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        text = path.read_text()
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    return RunConfig.resolve(game=args.game, preset=args.preset, file_text=text, overrides=overrides)


def _out_dir(args) -> Path:
    out = Path(args.out)
    if not out.is_dir():
        raise UsageError(f"output directory does not exist: {out}")
    return out


def _write_manifest(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "seed", "width", "height", "generation_seconds"])
        writer.writerows(rows)


def _level_name(i: int, count: int) -> str:
    return f"level_{i:0{max(3, len(str(count - 1)))}d}.txt"


def _level_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


# -- commands -----------------------------------------------------------------

def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    genome, report = train(cfg.train_config(), workers=args.workers)
    save_genome(out / "genome.txt", genome)
    report.write_csv(out / "train_report.csv")
    cfg.write(out / "resolved_config.txt")
    print(f"best composite fitness {report.best_composite:.4f} (generation {report.best_generation})")
    return EXIT_OK


def _load_generator(args, cfg: RunConfig) -> Generator:
    path = Path(args.genome)
    if not path.is_file():
        raise UsageError(f"genome file not found: {path}")
    try:
        return Generator.from_genome(load_genome(path), cfg.generator_settings())
    except ValueError as exc:
        raise UsageError(f"genome {path} does not fit the configured generator: {exc}") from None


def cmd_generate(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    generator = _load_generator(args, cfg)
    width = args.width or cfg["train.level_width"]
    height = args.height or cfg["train.level_height"]
    if width < 2 or height < 2 or args.count < 0:
        raise UsageError("width and height must be >= 2 and count >= 0")
    seed = cfg["seed"]
    generator.generate(2, 2, np.random.default_rng(0))  # load the compiled kernel before timing
    rows = []
    for i in range(args.count):
        rng = _level_rng(seed, i)
        t0 = time.perf_counter()
        level = generator.generate(width, height, rng)
        elapsed = time.perf_counter() - t0
        name = _level_name(i, args.count)
        write_level(out / name, level)
        rows.append([name, seed, width, height, repr(elapsed)])
    _write_manifest(out / "manifest.csv", rows)
    cfg.write(out / "resolved_config.txt")
    print(f"wrote {args.count} levels to {out}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    ga = cfg.directga_config()
    tileset = tileset_for(cfg.game)
    width = args.width or cfg["train.level_width"]
    height = args.height or cfg["train.level_height"]
    if args.count < 0:
        raise UsageError("count must be >= 0")
    seed = cfg["seed"]
    rows = []
    for i in range(args.count):
        rng = _level_rng(seed, i)
        t0 = time.perf_counter()
        level = directga_evolve(ga, width, height, rng, tileset)
        elapsed = time.perf_counter() - t0
        name = _level_name(i, args.count)
        write_level(out / name, level)
        rows.append([name, seed, width, height, repr(elapsed)])
    _write_manifest(out / "manifest.csv", rows)
    cfg.write(out / "resolved_config.txt")
    print(f"evolved {args.count} levels into {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    level_dir = Path(args.levels)
    if not level_dir.is_dir():
        raise UsageError(f"level directory does not exist: {level_dir}")
    tileset = tileset_for(cfg.game)
    levels, names = [], []
    for path in sorted(level_dir.glob("*.txt")):
        if path.name in _RUN_ARTIFACTS:
            continue
        try:
            levels.append(read_level(path, tileset))
            names.append(path.name)
        except (LevelFormatError, UnicodeDecodeError, OSError) as exc:
            print(f"skipping {path.name}: {exc}", file=sys.stderr)
    if not levels:
        print(f"no valid levels in {level_dir}", file=sys.stderr)
        return EXIT_RUNTIME

    with open(out / "per_level.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "solvable", "astar_difficulty", "leniency"])
        for name, level in zip(names, levels):
            writer.writerow([name, int(solve(level).solvable), repr(astar_difficulty(level)),
                             repr(leniency(level))])
    report = MetricReport(random_baseline=args.random_baseline)
    report.add(cfg["seed"], evaluate_levels(levels, random_baseline=args.random_baseline))
    report.write_csv(out / "metrics.csv")
    report.write_summary_csv(out / "metrics_summary.csv")
    cfg.write(out / "resolved_config.txt")
    for name, (mean, _, _) in report.summary().items():
        print(f"{name:22s} {mean:.4f}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    sizes = _parse_sizes(args.sizes)
    if args.trials < 3:
        raise UsageError("--trials must be >= 3")
    seed = cfg["seed"]
    if args.method == "pcgnn":
        if args.genome is None:
            raise UsageError("--genome is required for --method pcgnn")
        generator = _load_generator(args, cfg)
        rows = benchmark_generation(generator.generate, sizes, args.trials, seed)
        write_timing_csv(out / "benchmark.csv", rows)
    else:
        ga = cfg.directga_config()
        tileset = tileset_for(cfg.game)
        rows = benchmark_generation(lambda w, h, rng: directga_evolve(ga, w, h, rng, tileset),
                                    sizes, args.trials, seed)
        write_timing_csv(out / "benchmark.csv", rows)
        if args.generations:
            with open(out / "generations_sweep.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["generations", "size", "median_s", "std_s", "trials"])
                for gens in _parse_ints(args.generations, "--generations"):
                    swept = replace(ga, generations=gens)
                    for row in benchmark_generation(
                            lambda w, h, rng: directga_evolve(swept, w, h, rng, tileset),
                            sizes, args.trials, seed):
                        writer.writerow([gens, row.size, repr(row.median_s), repr(row.std_s), row.trials])
    cfg.write(out / "resolved_config.txt")
    for row in rows:
        print(f"{row.size:>11s} median {row.median_s:.6f} s")
    return EXIT_OK


def cmd_render(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    path = Path(args.level)
    if not path.is_file():
        raise UsageError(f"level file not found: {path}")
    level = read_level(path, tileset_for(cfg.game))
    write_pgm(out / f"{path.stem}.pgm", level)
    result = solve(level)
    write_trajectory_csv(out / f"{path.stem}_trajectory.csv", result)
    print(f"solvable={result.solvable} path_length={len(result.trajectory)} expanded={result.expanded}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", default=".", help="existing output directory")
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--workers", type=int, default=1, help="evaluation processes")
    common.add_argument("--preset", help="paper, desk, directga-plus or directga-novelty")
    common.add_argument("--game", choices=["maze", "mario"], help="game (overrides the config)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="pcgnn", description="Evolve and evaluate tile-level generators.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", parents=[common], help="evolve a generator")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", parents=[common], help="generate levels from a genome")
    p.add_argument("--genome", required=True)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", parents=[common], help="compute metrics for a level directory")
    p.add_argument("--levels", required=True)
    p.add_argument("--random-baseline", action="store_true",
                   help="include unsolvable levels in difficulty and diversity")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", parents=[common], help="time level generation")
    p.add_argument("--method", choices=["pcgnn", "directga"], default="pcgnn")
    p.add_argument("--genome")
    p.add_argument("--sizes", default="14")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--generations", help="comma-separated DirectGA generation counts to sweep")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("baseline", parents=[common], help="evolve levels with DirectGA")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("render", parents=[common], help="write a PGM image and solver trajectory")
    p.add_argument("--level", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
