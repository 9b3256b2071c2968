"""Acceptance harness: twelve checks of the algebra, the exact engine and the simulator.

Each check returns a ``CheckResult`` whose ``details`` are report entries with a
name, a statistic, a threshold and a verdict.  ``run_checks`` drives a
selection of them and ``report`` packages the outcome as JSON-ready data.

The ``full`` profile uses the acceptance sizes; ``quick`` shrinks the Monte
Carlo parts for smoke runs.  ``fault="g"`` swaps in a perturbed bar-increment
probability so the harness can be seen to fail.
"""

from __future__ import annotations

import json
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .chain import (
    RunSpec,
    alpha_threshold,
    bound_b,
    g_param,
    geometric_comparison_cdf,
    run_batch,
    sampled_streets,
    tail_bound_a,
)
from .diagrams import (
    Diagram,
    bar_count,
    bar_pair,
    canonical_key,
    compose,
    enumerate_diagrams,
    identity,
    is_walled,
    parse_diagram,
    random_diagram,
)
from .exact import hitting_cdf, bar_increment_probability, domination_table, max_bar_jump, w_exact_cdf
from .lattice import MODELS, ModelParams, StreetConfig, conditioned_law, enumerate_streets, prob_u_le2, trace_street
from .runs import replay, simulate_config, simulate_files
from .manifest import RunManifest
from .stats import ks_geometric, tail_vs_bound, wilson_interval

REPORT_SCHEMA_ID = "mirrorcyl.report/1"
FAULTS = ("g",)


@dataclass(frozen=True)
class Profile:
    name: str
    assoc_triples: int = 1000
    ks_trials: int = 10_000
    mc_trials: int = 100_000
    tail_n: int = 40
    tail_trials: int = 10_000
    walled_streets: int = 10_000
    bar_increment_samples: int = 20


PROFILES = {
    "full": Profile("full"),
    "quick": Profile("quick", assoc_triples=200, ks_trials=3000, mc_trials=100_000, tail_n=20,
                     tail_trials=4000, walled_streets=2000, bar_increment_samples=5),
}


@dataclass
class CheckResult:
    name: str
    criterion: int
    details: list = field(default_factory=list)
    seconds: float = 0.0
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(d["verdict"] in ("pass", "vacuous", "not-applicable") for d in self.details)

    def add(self, name: str, statistic, threshold, ok: Optional[bool] = None, verdict: Optional[str] = None):
        if verdict is None:
            verdict = "pass" if ok else "violation"
        self.details.append({"name": name, "statistic": _plain(statistic), "threshold": _plain(threshold),
                             "verdict": verdict})

    def to_dict(self) -> dict:
        out = {"name": self.name, "criterion": self.criterion, "passed": self.passed,
               "seconds": round(self.seconds, 3), "details": self.details}
        if self.error is not None:
            out["error"] = self.error
        return out

    def summary(self) -> str:
        bad = [d for d in self.details if d["verdict"] == "violation"]
        tag = "PASS" if self.passed else "FAIL"
        extra = f"; first failure: {bad[0]['name']}" if bad else (f"; error: {self.error}" if self.error else "")
        return f"[{tag}] {self.criterion:>2} {self.name} ({len(self.details)} checks, {self.seconds:.1f}s{extra})"


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


@dataclass
class Context:
    profile: Profile = PROFILES["full"]
    seed: int = 20240601
    threads: int = 1
    g: Callable[[str, ModelParams, int], float] = g_param
    _cache: dict = field(default_factory=dict)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def tail_runs(self) -> dict:
        """Full-model runs shared by the two tail checks."""
        if "tail" not in self._cache:
            n = self.profile.tail_n
            params = ModelParams(n, 1 / n, 1.0)
            self._cache["tail"] = {
                model: run_batch(RunSpec(model, params, self.profile.tail_trials, self.seed + i), self.threads)
                for i, model in enumerate(MODELS)
            }
        return self._cache["tail"]


def perturbed_g(factor: float = 1.1) -> Callable[[str, ModelParams, int], float]:
    def g(model: str, params: ModelParams, k: int) -> float:
        return min(1.0, factor * g_param(model, params, k))
    return g


# -- individual checks -------------------------------------------------------

def check_algebra(ctx: Context) -> CheckResult:
    res = CheckResult("algebra", 1)
    for n, expected in ((2, 3), (4, 105)):
        ds = list(enumerate_diagrams(n))
        res.add(f"count n={n}", len(ds), expected, len(ds) == expected)
        keys = {canonical_key(d) for d in ds}
        res.add(f"distinct n={n}", len(keys), expected, len(keys) == expected)
        valid = True
        for d in ds:
            try:
                Diagram(n, d.partner)
            except ValueError:
                valid = False
        res.add(f"involutions n={n}", int(valid), 1, valid)
        ok = all(0 <= bar_count(d) <= n // 2 for d in ds)
        res.add(f"bar range n={n}", int(ok), 1, ok)
        bars = [bar_count(d) for d in ds]
        worst = 0
        for a, ba in zip(ds, bars):
            for b, bb in zip(ds, bars):
                worst = max(worst, max(ba, bb) - bar_count(compose(a, b).diagram))
        res.add(f"bar monotonicity n={n} ({len(ds)}^2 products)", worst, 0, worst <= 0)
    rng = ctx.rng(1)
    failures = 0
    for _ in range(ctx.profile.assoc_triples):
        a, b, c = (random_diagram(8, rng) for _ in range(3))
        ab = compose(a, b)
        left = compose(ab.diagram, c)
        bc = compose(b, c)
        right = compose(a, bc.diagram)
        if left.diagram != right.diagram or ab.loops + left.loops != bc.loops + right.loops:
            failures += 1
    res.add(f"associativity n=8 ({ctx.profile.assoc_triples} triples)", failures, 0, failures == 0)
    return res


WORKED_PRODUCT = "[1+>1-, 2+>4-, 3+^4+, 5+>5-, 6+>6-, 2-v3-]"


def check_worked_product(ctx: Context) -> CheckResult:
    res = CheckResult("worked_product", 2)
    a = bar_pair(6, 3, 4)
    b = parse_diagram(WORKED_PRODUCT)
    out = compose(a, b)
    res.add("product diagram", str(out.diagram), WORKED_PRODUCT, out.diagram == b)
    res.add("loop count", out.loops, 1, out.loops == 1)
    return res


def check_xlaw(ctx: Context) -> CheckResult:
    res = CheckResult("xlaw", 3)
    for model in MODELS:
        for n in (2, 4, 6, 8):
            for p in (0.05, 0.3):
                params = ModelParams(n, p)
                norm = prob_u_le2(params)
                for t in ((1, 2) if model == "manhattan" else (1,)):
                    acc = defaultdict(list)
                    for cfg, w in enumerate_streets(model, params, max_mirrors=2, street_index=t):
                        acc[canonical_key(trace_street(cfg))].append(w)
                    traced = {k: math.fsum(v) / norm for k, v in acc.items()}
                    closed = {canonical_key(d): w for d, w in conditioned_law(model, params)}
                    keys = set(traced) | set(closed)
                    diff = max(abs(traced.get(k, 0.0) - closed.get(k, 0.0)) for k in keys)
                    res.add(f"{model} n={n} p={p} street={t}", diff, 1e-12, diff <= 1e-12)
    return res


def check_bar_increment(ctx: Context) -> CheckResult:
    res = CheckResult("bar_increment", 4)
    rng = ctx.rng(4)
    for model in MODELS:
        for n in (4, 6, 8):
            params = ModelParams(n, 0.05)
            for k in range(n // 2):
                worst = 0.0
                jump = 0
                g = ctx.g(model, params, k)
                for _ in range(ctx.profile.bar_increment_samples):
                    b = random_diagram(n, rng, bars=k, walled=model == "manhattan")
                    worst = max(worst, abs(bar_increment_probability(model, params, k, b) - g))
                    jump = max(jump, max_bar_jump(model, params, b))
                res.add(f"{model} n={n} k={k} |P - g|", worst, 1e-12, worst <= 1e-12)
                res.add(f"{model} n={n} k={k} max bar jump", jump, 1, jump <= 1)
    return res


def check_geometric(ctx: Context) -> CheckResult:
    res = CheckResult("geometric", 5)
    n, p = 8, 0.05
    params = ModelParams(n, p)
    level = 0.01 / (n // 2)
    for i, model in enumerate(MODELS):
        batch = run_batch(RunSpec(model, params, ctx.profile.ks_trials, ctx.seed + 50 + i, conditioned=True),
                          ctx.threads)
        res.add(f"{model} censored trials", batch.censor_count, 0, batch.censor_count == 0)
        for k in range(n // 2):
            ks = ks_geometric(batch.waiting_samples(k), ctx.g(model, params, k), level)
            res.add(f"{model} KS w_{k}", ks.statistic, ks.critical, ks.passed)
    return res


def check_exact_vs_mc(ctx: Context) -> CheckResult:
    res = CheckResult("exact_vs_mc", 6)
    n, p, i_max = 4, 0.1, 200
    params = ModelParams(n, p)
    grid = np.arange(1, i_max + 1)
    # the Manhattan chain is also run with a westbound first street
    runs = [("mirror", "E"), ("manhattan", "E"), ("manhattan", "W")]
    for i, (model, first) in enumerate(runs):
        exact = hitting_cdf(model, params, False, i_max, first_direction=first)
        spec = RunSpec(model, params, ctx.profile.mc_trials, ctx.seed + 60 + i, first_direction=first)
        batch = run_batch(spec, ctx.threads)
        counts = batch.cdf_counts(grid)
        inside = 0
        for c, e in zip(counts, exact):
            iv = wilson_interval(int(c), batch.trials, 3.0)
            inside += iv.lower <= e <= iv.upper
        frac = inside / i_max
        res.add(f"{model} first={first} fraction of i in 1..{i_max} inside 3-sigma Wilson", frac, 0.99, frac >= 0.99)
    return res


def check_exact_routes(ctx: Context) -> CheckResult:
    res = CheckResult("exact_routes", 7)
    for model in MODELS:
        for p in (0.05, 0.1):
            params = ModelParams(4, p)
            a = hitting_cdf(model, params, True, 400)
            b = w_exact_cdf(model, params, 400, g=ctx.g)
            diff = float(np.max(np.abs(a - b)))
            res.add(f"{model} n=4 p={p}", diff, 1e-10, diff <= 1e-10)
    return res


def check_domination(ctx: Context) -> CheckResult:
    res = CheckResult("domination", 8)
    for model in MODELS:
        for p in (0.05, 0.1, 0.3):
            lhs, rhs = domination_table(model, ModelParams(4, p), 50)
            for k in (1, 2):
                gap = float(np.min(lhs[:, k] - rhs[:, k]))
                res.add(f"{model} p={p} k={k} min(lhs - rhs)", gap, -1e-12, gap >= -1e-12)
    return res


def tail_a_grid(C: float = 1.0) -> list[float]:
    return [m * 8 * math.exp(C) for m in (1, 2, 4, 8)]


def check_tail_a(ctx: Context) -> CheckResult:
    res = CheckResult("tail_a", 9)
    runs = ctx.tail_runs()
    C = 1.0
    alphas = tail_a_grid(C)
    names, hits, bounds, trials = [], [], [], None
    for model, batch in runs.items():
        p = batch.spec.params.p
        res.add(f"{model} censored trials", batch.censor_count, 0, batch.censor_count == 0)
        for a in alphas:
            names.append(f"{model} alpha={a:.3f}")
            hits.append(int(batch.tail_counts([alpha_threshold(a, p)])[0]))
            bounds.append(tail_bound_a(model, a, C))
        trials = batch.trials
    for chk in tail_vs_bound(names, hits, trials, bounds, level=0.01, side="upper"):
        res.add(chk.name, chk.statistic, chk.threshold, verdict=chk.verdict)
    return res


def check_tail_b(ctx: Context) -> CheckResult:
    res = CheckResult("tail_b", 10)
    for model, batch in ctx.tail_runs().items():
        p = batch.spec.params.p
        N = batch.trials
        for a in (0.05, 0.1, 0.2):
            b = bound_b(a)
            emp = batch.cdf_counts([alpha_threshold(a, p)])[0] / N
            limit = b + 3 * math.sqrt(b * (1 - b) / N)
            res.add(f"{model} P[V <= {a} p^-2]", emp, limit, emp <= limit)
        alphas = np.round(np.arange(1, 201) * 0.05, 10)
        worst, where = -math.inf, None
        emp = batch.cdf_counts([alpha_threshold(a, p) for a in alphas]) / N
        for a, e in zip(alphas, emp):
            gc = geometric_comparison_cdf(float(a), p)
            excess = e - (gc + 3 * math.sqrt(gc * (1 - gc) / N))
            if excess > worst:
                worst, where = excess, a
        res.add(f"{model} max over alpha of ECDF - (geometric + 3 sigma) (at alpha={where})", worst, 0.0, worst <= 0)
    return res


def check_determinism(ctx: Context) -> CheckResult:
    res = CheckResult("determinism", 11)
    configs = [
        simulate_config("mirror", 8, 0.1, 1500, ctx.seed + 110),
        simulate_config("manhattan", 6, 0.08, 1200, ctx.seed + 111, conditioned=True, cap=20_000),
    ]
    for cfg in configs:
        files, manifest, _ = simulate_files(cfg, 1)
        stored = RunManifest.from_dict(json.loads(json.dumps(manifest.to_dict())))
        label = f"{cfg['model']}{' conditioned' if cfg['conditioned'] else ''}"
        for threads in (1, 2, 8):
            again, fresh, _ = replay(stored, threads)
            same = all(again[k] == files[k] for k in files) and fresh.manifest_hash == manifest.manifest_hash
            res.add(f"{label} replay with {threads} threads", int(same), 1, same)
    return res


def check_walled(ctx: Context) -> CheckResult:
    res = CheckResult("walled", 12)
    streets = ctx.profile.walled_streets
    for n in (4, 8, 12):
        params = ModelParams(n, 0.3)
        spec = RunSpec("manhattan", params, 1, ctx.seed + 120 + n)
        orient, diags = sampled_streets(spec, 0, streets)
        codes = {0: ".", 1: "/", 2: "\\"}
        traced_ok = walled_streets = walled_products = 0
        prod = identity(n)
        for t in range(streets):
            d = Diagram._trusted(n, [int(v) for v in diags[t]])
            cfg = StreetConfig.from_string("".join(codes[int(c)] for c in orient[t]), "manhattan", t + 1)
            traced_ok += trace_street(cfg) == d
            walled_streets += is_walled(d)
            prod = compose(prod, d).diagram
            walled_products += is_walled(prod)
        res.add(f"n={n} kernel trace equals reference trace", traced_ok, streets, traced_ok == streets)
        res.add(f"n={n} walled streets", walled_streets, streets, walled_streets == streets)
        res.add(f"n={n} walled running products", walled_products, streets, walled_products == streets)
    return res


CHECKS: dict[str, Callable[[Context], CheckResult]] = {
    "algebra": check_algebra,
    "worked_product": check_worked_product,
    "xlaw": check_xlaw,
    "bar_increment": check_bar_increment,
    "geometric": check_geometric,
    "exact_vs_mc": check_exact_vs_mc,
    "exact_routes": check_exact_routes,
    "domination": check_domination,
    "tail_a": check_tail_a,
    "tail_b": check_tail_b,
    "determinism": check_determinism,
    "walled": check_walled,
}

# alternative spellings accepted by ``--only``
CHECK_ALIASES = {"figure4": "worked_product", "lemma3": "bar_increment", "lemma56": "domination"}


def resolve_check(name: str) -> str:
    name = CHECK_ALIASES.get(name, name)
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}")
    return name


def run_check(name: str, ctx: Context) -> CheckResult:
    name = resolve_check(name)
    t0 = time.perf_counter()
    try:
        res = CHECKS[name](ctx)
    except Exception as exc:  # a crashing check is a failed check
        res = CheckResult(name, list(CHECKS).index(name) + 1, error=f"{type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def run_checks(only=None, profile: str = "full", seed: int = 20240601, threads: int = 1,
               fault: Optional[str] = None, progress: Optional[Callable[[CheckResult], None]] = None
               ) -> list[CheckResult]:
    names = list(CHECKS) if not only else [CHECK_ALIASES.get(n, n) for n in only]
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    if fault not in (None, *FAULTS):
        raise KeyError(f"unknown fault {fault!r}")
    ctx = Context(PROFILES[profile], seed, threads, perturbed_g() if fault == "g" else g_param)
    out = []
    for name in names:
        res = run_check(name, ctx)
        if progress is not None:
            progress(res)
        out.append(res)
    return out


def report(results: list[CheckResult], profile: str, seed: int, fault: Optional[str]) -> dict:
    return {
        "schema": REPORT_SCHEMA_ID,
        "tool_version": __version__,
        "profile": profile,
        "seed": seed,
        "fault": fault,
        "passed": all(r.passed for r in results),
        "checks": [r.to_dict() for r in results],
    }
