"""Command-line entry point: ``noveltynas {search,enumerate,analyze,gen-benchmark}``.

Exit codes: 0 success, 1 configuration error, 2 oracle/data error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shutil
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .arch_space import enumerate_space, get_space
from .evaluator import make_synthetic, oracle_from_spec, true_score, write_benchmark
from .exceptions import (
    BenchmarkError,
    ConfigError,
    OracleLookupError,
    UnsupportedSpaceError,
)
from .moea import EAConfig
from .novelty import NoveltyConfig
from .search import MODES, SearchConfig, SearchResult, diversity_series, run_search

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3

DEFAULTS = {
    "space": "s2",
    "mode": "multi",
    "seed": 0,
    "population_size": 20,
    "generations": 50,
    "crossover_eta": 15.0,
    "crossover_prob": 0.7,
    "mutation_eta": 20.0,
    "mutation_prob": 0.1,
    "k": 5,
    "oracle": "synthetic:0",
    "noise_sigma": 0.0,
    "noise_seed": None,
    "noise_per_generation": True,
    "archive_cap": None,
    "workers": None,
}

_INT_FIELDS = {"seed", "population_size", "generations", "k"}
_FLOAT_FIELDS = {"crossover_eta", "crossover_prob", "mutation_eta", "mutation_prob", "noise_sigma"}


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _err(msg: str):
    print(f"error: {msg}", file=sys.stderr)


def load_config(path) -> dict:
    """Read a flat TOML key/value file; unknown keys are a config error."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"{path}: {exc}") from None
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration key")
    return data


def resolve_config(file_values: dict, overrides: dict) -> dict:
    """Merge defaults < config file < command-line flags and type-check."""
    cfg = dict(DEFAULTS)
    cfg.update(file_values)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    for name in _INT_FIELDS:
        if isinstance(cfg[name], bool) or not isinstance(cfg[name], int):
            raise ConfigError(name, f"expected an integer, got {cfg[name]!r}")
    for name in _FLOAT_FIELDS:
        if isinstance(cfg[name], bool) or not isinstance(cfg[name], (int, float)):
            raise ConfigError(name, f"expected a number, got {cfg[name]!r}")
        cfg[name] = float(cfg[name])
    if cfg["mode"] not in MODES:
        raise ConfigError("mode", f"expected one of {', '.join(MODES)}")
    if str(cfg["space"]).upper() not in ("S1", "S2"):
        raise ConfigError("space", "expected s1 or s2")
    cfg["space"] = str(cfg["space"]).lower()
    if cfg["noise_sigma"] < 0:
        raise ConfigError("noise_sigma", "must be non-negative")
    if cfg["noise_seed"] is None:
        cfg["noise_seed"] = cfg["seed"]
    if cfg["workers"] is None:
        cfg["workers"] = os.cpu_count() or 1
    if not isinstance(cfg["workers"], int) or cfg["workers"] < 1:
        raise ConfigError("workers", "must be a positive integer")
    if cfg["archive_cap"] is not None and (not isinstance(cfg["archive_cap"], int) or cfg["archive_cap"] < 1):
        raise ConfigError("archive_cap", "must be a positive integer")
    if cfg["k"] < 1:
        raise ConfigError("k", "must be at least 1")
    if not isinstance(cfg["oracle"], str) or ":" not in cfg["oracle"]:
        raise ConfigError("oracle", "expected tabular:PATH or synthetic:SEED")
    try:
        EAConfig(
            population_size=cfg["population_size"],
            generations=cfg["generations"],
            crossover_eta=cfg["crossover_eta"],
            crossover_prob=cfg["crossover_prob"],
            mutation_eta=cfg["mutation_eta"],
            mutation_prob=cfg["mutation_prob"],
            rng_seed=cfg["seed"],
        )
    except ValueError as exc:
        field = str(exc).split()[0]
        raise ConfigError(field if field in DEFAULTS else "ea", str(exc)) from None
    return cfg


def build_oracle(cfg: dict):
    try:
        return oracle_from_spec(
            cfg["oracle"],
            cfg["space"],
            noise_sigma=cfg["noise_sigma"],
            noise_seed=cfg["noise_seed"],
            per_generation=cfg["noise_per_generation"],
        )
    except FileNotFoundError as exc:
        raise CLIError(EXIT_DATA, f"benchmark file not found: {exc.filename}") from None
    except UnsupportedSpaceError as exc:
        raise CLIError(EXIT_CONFIG, f"oracle: {exc}") from None
    except (BenchmarkError, OSError) as exc:
        raise CLIError(EXIT_DATA, str(exc)) from None
    except ValueError as exc:
        raise CLIError(EXIT_CONFIG, f"oracle: {exc}") from None


def search_config(cfg: dict, oracle, telemetry_path=None) -> SearchConfig:
    return SearchConfig(
        oracle=oracle,
        space=cfg["space"],
        ea=EAConfig(
            population_size=cfg["population_size"],
            generations=cfg["generations"],
            crossover_eta=cfg["crossover_eta"],
            crossover_prob=cfg["crossover_prob"],
            mutation_eta=cfg["mutation_eta"],
            mutation_prob=cfg["mutation_prob"],
            rng_seed=cfg["seed"],
        ),
        novelty=NoveltyConfig(cfg["k"]),
        mode=cfg["mode"],
        telemetry_path=telemetry_path,
        workers=cfg["workers"],
        archive_cap=cfg["archive_cap"],
        oracle_spec=cfg["oracle"],
    )


def _publish(staging: Path, out: Path):
    """Move a finished staging directory into place."""
    if not out.exists():
        os.replace(staging, out)
        return
    for item in staging.iterdir():
        os.replace(item, out / item.name)
    staging.rmdir()


def cmd_search(args) -> int:
    file_values = load_config(args.config) if args.config else {}
    cfg = resolve_config(
        file_values,
        {
            "seed": args.seed,
            "mode": args.mode,
            "space": args.space,
            "oracle": args.oracle,
            "noise_sigma": args.noise_sigma,
            "workers": args.workers,
            "generations": args.generations,
            "population_size": args.population_size,
        },
    )
    oracle = build_oracle(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        scfg = search_config(cfg, oracle, staging / "telemetry.csv")
        manifest = {
            "config_file": str(args.config) if args.config else None,
            "resolved": {k: v for k, v in cfg.items()},
            "output_dir": str(out),
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        (staging / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        try:
            result = run_search(scfg)
        except OracleLookupError as exc:
            raise CLIError(EXIT_DATA, str(exc)) from None
        (staging / "result.json").write_text(result.to_json(), encoding="utf-8")
        _publish(staging, out)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    best = result.best
    print(f"best {best['key']} f_acc={best['f_acc']:.4f} true={best['true_score']:.4f}")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    try:
        space = get_space(args.space)
        archs = enumerate_space(space)
        first = next(archs)
    except UnsupportedSpaceError as exc:
        raise CLIError(EXIT_CONFIG, str(exc)) from None
    oracle = build_oracle({**DEFAULTS, "space": args.space, "oracle": args.oracle, "noise_seed": 0}) if args.oracle else None
    sink = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    count, best_key, best_score = 0, None, -np.inf
    try:
        for arch in _chain(first, archs):
            count += 1
            if oracle is None:
                sink.write(arch.key + "\n")
                continue
            score = true_score(oracle, arch)
            sink.write(f"{arch.key},{score!r}\n")
            if score > best_score:
                best_key, best_score = arch.key, score
    finally:
        if sink is not sys.stdout:
            sink.close()
    print(f"count {count}", file=sys.stderr)
    if oracle is not None:
        print(f"argmax {best_key} {best_score!r}", file=sys.stderr)
    return EXIT_OK


def _chain(first, rest):
    yield first
    yield from rest


def _run_label(i: int, path: Path) -> str:
    return f"run{i}_{path.stem}"


def cmd_analyze(args) -> int:
    results = []
    for p in args.results:
        path = Path(p)
        try:
            results.append((path, SearchResult.load(path)))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CLIError(EXIT_DATA, f"malformed result file {path}: {exc}") from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    labels = [_run_label(i, p) for i, (p, _) in enumerate(results)]

    series = [diversity_series(r) for _, r in results]
    length = max(len(s) for s in series)
    with open(out / "diversity.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gen", *labels])
        for g in range(length):
            w.writerow([g, *[s[g] if g < len(s) else "" for s in series]])

    oracle = None
    if args.oracle:
        space = results[0][1].config.get("space", "S2")
        oracle = build_oracle({**DEFAULTS, "space": space, "oracle": args.oracle, "noise_seed": 0})
    explored = [set(r.explored) for _, r in results]
    with open(out / "exploration.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "true_score", *labels])
        if oracle is not None and not oracle.space.is_pruned:
            for arch in enumerate_space(oracle.space):
                w.writerow([arch.key, repr(true_score(oracle, arch)), *[int(arch.key in e) for e in explored]])
        else:
            known = {}
            for _, r in results:
                for entry in r.pareto_front:
                    known[entry["key"]] = entry["true_score"]
            seen = []
            for _, r in results:
                seen.extend(k for k in r.explored if k not in seen)
            for key in dict.fromkeys(seen):
                score = known.get(key, "")
                w.writerow([key, repr(score) if score != "" else "", *[int(key in e) for e in explored]])

    best_acc = np.array([r.best["f_acc"] for _, r in results])
    best_true = np.array([r.best["true_score"] for _, r in results])
    print(f"runs {len(results)}")
    print(f"best f_acc {best_acc.mean():.4f} ± {best_acc.std():.4f}")
    print(f"best true_score {best_true.mean():.4f} ± {best_true.std():.4f}")
    print(f"explored {np.mean([len(e) for e in explored]):.1f} ± {np.std([len(e) for e in explored]):.1f}")
    return EXIT_OK


def cmd_gen_benchmark(args) -> int:
    try:
        oracle = make_synthetic(args.space, args.seed)
    except UnsupportedSpaceError as exc:
        raise CLIError(EXIT_CONFIG, str(exc)) from None
    out = Path(args.out)
    sidecar = out.with_suffix(".meta.json")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_benchmark(oracle.to_table(), out)
        sidecar.write_text(json.dumps(oracle.describe(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise CLIError(EXIT_RUNTIME, f"cannot write {exc.filename}: {exc.strerror}") from None
    print(f"wrote {len(oracle.scores)} rows to {out}; optimum {oracle.optimum_key}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noveltynas", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="run one search")
    p.add_argument("--config", help="TOML key/value file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="run")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--space", choices=("s1", "s2"))
    p.add_argument("--oracle", help="tabular:PATH or synthetic:SEED")
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--population-size", type=int)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("enumerate", help="list every architecture of a space")
    p.add_argument("--space", default="s2", choices=("s1", "s2"))
    p.add_argument("--oracle", help="also print scores from this oracle")
    p.add_argument("--output", help="write keys here instead of stdout")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("analyze", help="diversity/exploration tables from result files")
    p.add_argument("results", nargs="+")
    p.add_argument("--out", default=".")
    p.add_argument("--oracle", help="score every architecture of the space for exploration.csv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen-benchmark", help="write a synthetic benchmark CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--space", default="s2", choices=("s1", "s2"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_benchmark)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error in {exc}")
        return EXIT_CONFIG
    except CLIError as exc:
        _err(str(exc))
        return exc.code
    except Exception as exc:  # noqa: BLE001
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
