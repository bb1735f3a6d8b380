"""Command line: ``run``, ``sweep`` and ``compare``.

Exit codes: 0 ok, 2 invalid config or input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from fadas.core import ConfigError, SimConfig, apply_overrides, config_to_dict, load_config, validate_config
from fadas.sim import NonFiniteError, delay_stats, read_csv, run

log = logging.getLogger("fadas")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
AGG_METRICS = ("train_loss", "grad_norm_sq", "test_acc", "sim_time")
LAST_ROUNDS = 5


def write_atomic(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def simulate(cfg: SimConfig) -> tuple[str, dict]:
    """Run one config; returns (trace CSV text, summary dict)."""
    trace = run(cfg)
    last = trace.records[-1]
    summary = {
        "config": config_to_dict(cfg),
        "rounds": len(trace),
        "delay_stats": delay_stats(trace),
        "final": {
            "sim_time": last.sim_time,
            "train_loss": last.train_loss,
            "grad_norm_sq": last.grad_norm_sq,
            "test_acc": last.test_acc,
        },
    }
    return trace.to_csv(), summary


def _load(config_path, overrides) -> SimConfig:
    cfg = load_config(config_path)
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return validate_config(cfg)


def cmd_run(config_path, out_dir, overrides: Sequence[str] = ()) -> int:
    try:
        cfg = _load(config_path, overrides)
    except (ConfigError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        csv_text, summary = simulate(cfg)
    except NonFiniteError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out = Path(out_dir)
    paths = {"trace": out / "trace.csv", "summary": out / "summary.json"}
    write_atomic(paths["trace"], csv_text)
    write_atomic(paths["summary"], _json(summary))
    manifest = {
        "config": config_to_dict(cfg),
        "master_seeds": [cfg.master_seed],
        "outputs": {k: str(p) for k, p in paths.items()},
        "sha256": {k: _sha256(p) for k, p in paths.items()},
    }
    write_atomic(out / "manifest.json", _json(manifest))
    log.info("wrote %d rounds to %s", summary["rounds"], out)
    return EXIT_OK


def _sweep_one(cfg: SimConfig):
    try:
        return simulate(cfg)
    except NonFiniteError as exc:
        return exc


def _mean_std(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return {"mean": float(arr.mean()), "std": std, "n": int(arr.size)}


def aggregate_runs(per_seed_rows: dict[int, list[dict[str, float]]], last: int = LAST_ROUNDS) -> dict:
    """Average each metric over a run's last ``last`` rounds, then mean/sample-std across seeds."""
    out = {}
    for metric in AGG_METRICS:
        values = []
        for rows in per_seed_rows.values():
            tail = [r[metric] for r in rows[-last:] if r.get(metric) is not None and not math.isnan(r[metric])]
            if tail:
                values.append(float(np.mean(tail)))
        if values:
            out[metric] = _mean_std(values)
    return out


def sweep_workers() -> int:
    raw = os.environ.get("FADAS_SIM_THREADS")
    if raw:
        return max(1, int(raw))
    return max(1, min(os.cpu_count() or 1, 8))


def cmd_sweep(config_path, seeds: Sequence[int], out_dir, overrides: Sequence[str] = ()) -> int:
    if not seeds:
        print("need at least one seed", file=sys.stderr)
        return EXIT_CONFIG
    try:
        base = _load(config_path, overrides)
        cfgs = [validate_config(replace(base, master_seed=int(s))) for s in seeds]
    except (ConfigError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    workers = min(sweep_workers(), len(cfgs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, cfgs))
    else:
        results = [_sweep_one(c) for c in cfgs]

    out = Path(out_dir)
    outputs, failures, rows = {}, {}, {}
    for seed, res in zip(seeds, results):
        if isinstance(res, Exception):
            failures[str(seed)] = str(res)
            continue
        csv_text, summary = res
        tpath, spath = out / f"trace_seed{seed}.csv", out / f"summary_seed{seed}.json"
        write_atomic(tpath, csv_text)
        write_atomic(spath, _json(summary))
        outputs[f"trace_seed{seed}"] = tpath
        outputs[f"summary_seed{seed}"] = spath
        rows[int(seed)] = read_csv(tpath)[1]

    aggregate = {
        "seeds": [int(s) for s in seeds],
        "last_rounds": LAST_ROUNDS,
        "metrics": aggregate_runs(rows) if rows else {},
        "failures": failures,
    }
    apath = out / "aggregate.json"
    write_atomic(apath, _json(aggregate))
    outputs["aggregate"] = apath
    manifest = {
        "config": config_to_dict(base),
        "master_seeds": [int(s) for s in seeds],
        "outputs": {k: str(p) for k, p in outputs.items()},
        "sha256": {k: _sha256(p) for k, p in outputs.items()},
    }
    write_atomic(out / "manifest.json", _json(manifest))
    for seed, msg in failures.items():
        print(f"seed {seed} failed: {msg}", file=sys.stderr)
    return EXIT_RUNTIME if failures else EXIT_OK


class CompareError(ValueError):
    pass


def cmd_compare(trace_a, trace_b) -> dict:
    """Max absolute difference per column between two traces, rows aligned by round."""
    ha, ra = read_csv(trace_a)
    hb, rb = read_csv(trace_b)
    if ha != hb:
        raise CompareError(f"schema mismatch: {ha} vs {hb}")
    if len(ra) != len(rb):
        raise CompareError(f"row count mismatch: {len(ra)} vs {len(rb)}")
    report = {}
    for col in ha:
        worst = 0.0
        for x, y in zip(ra, rb):
            a, b = x[col], y[col]
            if math.isnan(a) and math.isnan(b):
                continue
            worst = max(worst, abs(a - b))
        report[col] = worst
    return report


def _seed_list(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fadas-sim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one simulation")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    s = sub.add_parser("sweep", help="run one simulation per seed and aggregate")
    s.add_argument("--config", required=True)
    s.add_argument("--seeds", required=True, type=_seed_list, help="comma separated, e.g. 1,2,3")
    s.add_argument("--out", required=True)
    s.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    c = sub.add_parser("compare", help="per-column max abs difference of two trace CSVs")
    c.add_argument("a")
    c.add_argument("b")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "run":
        return cmd_run(args.config, args.out, args.overrides)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.seeds, args.out, args.overrides)
    try:
        report = cmd_compare(args.a, args.b)
    except (CompareError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(report, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
