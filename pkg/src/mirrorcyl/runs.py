"""Configured runs that produce the CLI's output files.

Each ``*_files`` function maps a plain configuration dict to the bytes of its
output files plus a ``RunManifest``.  The configuration dict is exactly what the
manifest stores, so a manifest can be replayed with ``replay``.
"""

from __future__ import annotations

import csv
import io
import math
import time
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm

from .chain import RunSpec, alpha_threshold, bound_b, geometric_comparison_cdf, run_batch, tail_bound_a, tail_bound_w
from .exact import cdf_csv, hitting_cdf
from .lattice import ModelParams
from .manifest import RunManifest, dump_json
from .stats import wilson_interval

TAILGRID_COLUMNS = (
    "alpha", "threshold", "tail", "tail_lower", "tail_upper", "bound_a",
    "cdf", "cdf_lower", "cdf_upper", "bound_b", "geometric_cdf",
)


def simulate_config(model: str, n: int, p: float, trials: int, seed: int, conditioned: bool = False,
                    cap: Optional[int] = None, C: Optional[float] = None, first_direction: str = "E",
                    count_loops: bool = False) -> dict:
    spec = RunSpec(model, ModelParams(n, p, C), trials, seed, conditioned, cap, first_direction, count_loops)
    return _spec_config(spec)


def _spec_config(spec: RunSpec) -> dict:
    return {
        "model": spec.model,
        "n": spec.params.n,
        "p": float(spec.params.p),
        "C": spec.params.C,
        "trials": spec.trials,
        "master_seed": spec.master_seed,
        "street_cap": spec.street_cap,
        "conditioned": spec.conditioned,
        "first_direction": spec.first_direction,
        "count_loops": spec.count_loops,
    }


def spec_from_config(config: dict) -> RunSpec:
    return RunSpec(
        config["model"], ModelParams(config["n"], config["p"], config.get("C")), config["trials"],
        config["master_seed"], config.get("conditioned", False), config.get("street_cap"),
        config.get("first_direction", "E"), config.get("count_loops", False),
    )


def simulate_files(config: dict, threads: int = 1) -> tuple[dict[str, bytes], RunManifest, object]:
    spec = spec_from_config(config)
    t0 = time.perf_counter()
    result = run_batch(spec, threads)
    wall = time.perf_counter() - t0
    manifest = RunManifest("simulate", dict(config), wall, result.censor_count, threads)
    agg = {"manifest_hash": manifest.manifest_hash, **result.aggregate()}
    files = {"trials.csv": result.to_csv().encode("utf-8"), "aggregate.json": dump_json(agg)}
    return files, manifest, result


def exact_config(model: str, n: int, p: float, i_max: int, conditioned: bool = False,
                 first_direction: str = "E", max_width: int = 6, budget: int = 3**8) -> dict:
    return {
        "model": model, "n": n, "p": float(p), "i_max": i_max, "conditioned": conditioned,
        "first_direction": first_direction, "max_width": max_width, "budget": budget,
    }


def exact_files(config: dict, threads: int = 1) -> tuple[dict[str, bytes], RunManifest, np.ndarray]:
    t0 = time.perf_counter()
    cdf = hitting_cdf(
        config["model"], ModelParams(config["n"], config["p"]), config["conditioned"], config["i_max"],
        config["first_direction"], config["max_width"], config["budget"],
    )
    manifest = RunManifest("exact", dict(config), time.perf_counter() - t0, None, threads)
    return {"cdf.csv": cdf_csv(cdf).encode("utf-8")}, manifest, cdf


def tailgrid_config(model: str, n: int, p: float, trials: int, seed: int, alphas: Sequence[float],
                    conditioned: bool = False, cap: Optional[int] = None, C: Optional[float] = None,
                    confidence: float = 0.99) -> dict:
    cfg = simulate_config(model, n, p, trials, seed, conditioned, cap, C)
    cfg["alphas"] = [float(a) for a in alphas]
    cfg["confidence"] = float(confidence)
    return cfg


def tailgrid_rows(result, alphas: Sequence[float], confidence: float = 0.99) -> list[dict]:
    """Empirical tails and CDF values of the hitting time at alpha p^-2 next to the bound curves."""
    spec = result.spec
    p = spec.params.p
    if p <= 0:
        raise ValueError("the alpha grid needs p > 0")
    C = spec.params.density
    z = float(norm.isf((1 - confidence) / 2))
    rows = []
    for a in alphas:
        x = alpha_threshold(a, p)
        row = {"alpha": a, "threshold": x}
        identifiable = not (result.censor_count and x > spec.street_cap)
        if identifiable:
            tail = wilson_interval(int(result.tail_counts([x])[0]), result.trials, z)
            row.update(tail=tail.point, tail_lower=tail.lower, tail_upper=tail.upper)
        else:
            row.update(tail=None, tail_lower=None, tail_upper=None)
        bound = tail_bound_w(spec.model, a, C) if spec.conditioned else tail_bound_a(spec.model, a, C)
        cdf = wilson_interval(int(result.cdf_counts([x])[0]), result.trials, z)
        row.update(bound_a=bound, cdf=cdf.point, cdf_lower=cdf.lower, cdf_upper=cdf.upper,
                   bound_b=bound_b(a), geometric_cdf=geometric_comparison_cdf(a, p))
        rows.append(row)
    return rows


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def tailgrid_files(config: dict, threads: int = 1):
    spec = spec_from_config(config)
    t0 = time.perf_counter()
    result = run_batch(spec, threads)
    rows = tailgrid_rows(result, config["alphas"], config["confidence"])
    manifest = RunManifest("tailgrid", dict(config), time.perf_counter() - t0, result.censor_count, threads)
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TAILGRID_COLUMNS)
    for row in rows:
        w.writerow([_csv_value(row[c]) for c in TAILGRID_COLUMNS])
    return {"tailgrid.csv": buf.getvalue().encode("utf-8")}, manifest, rows


RUNNERS = {"simulate": simulate_files, "exact": exact_files, "tailgrid": tailgrid_files}


def replay(manifest: RunManifest, threads: int = 1):
    """Re-run the configuration recorded in ``manifest``."""
    try:
        runner = RUNNERS[manifest.command]
    except KeyError:
        raise ValueError(f"cannot replay a {manifest.command!r} manifest") from None
    return runner(dict(manifest.config), threads)

