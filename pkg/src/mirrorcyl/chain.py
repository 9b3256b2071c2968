"""Monte Carlo hitting times of the full and conditioned street chains.

A trial starts from the identity diagram and right-multiplies one street
diagram per street until the running product has all n/2 bars.  The full
chain draws streets from the mirror or Manhattan model; the conditioned chain
draws them from the at-most-two-mirrors law.  The bound formulas of the tail
estimates live here as well.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import binom

from . import _kernels
from .lattice import ModelParams, check_model, conditioned_law, prob_u_le2

#: Trials per work unit; fixed so that outputs do not depend on the thread count.
CHUNK = 512
DEFAULT_CAP = 1_000_000


@dataclass(frozen=True)
class BoundParams:
    """Constants of the tail bounds for density constant ``C``."""

    C: float
    A_mir: float = math.cosh(math.pi)
    A_mat: float = math.sinh(math.pi) / math.pi

    @property
    def C2(self) -> float:
        return 0.5 * self.C**2 + self.C + 1

    @property
    def C3(self) -> float:
        return math.exp(-self.C) * (1 + self.C + self.C**2 / 2)

    def A(self, model: str) -> float:
        return self.A_mir if check_model(model) == "mirror" else self.A_mat


def g_param(model: str, params: ModelParams, k: int) -> float:
    """Probability that one conditioned street adds a bar to a diagram with k bars."""
    check_model(model)
    n, p = params.n, params.p
    if not 0 <= k < n // 2:
        raise ValueError(f"k must lie in [0, {n // 2}), got {k}")
    # kept as products and quotients of p so Fraction inputs stay exact
    if model == "mirror":
        weight = p * p * math.comb(n - 2 * k, 2) / 2
    else:
        weight = p * p * (n // 2 - k) ** 2
    return weight * (1 - p) ** (n - 2) / prob_u_le2(params)


def tail_bound_a(model: str, alpha: float, C: float) -> float:
    """Upper bound on P[V >= alpha p^-2] for the full model."""
    return 2 * BoundParams(C).A(model) * math.exp(-alpha / (8 * math.exp(C)))


def tail_bound_w(model: str, alpha: float, C: float) -> float:
    """Upper bound on P[W >= alpha p^-2] for the conditioned chain."""
    b = BoundParams(C)
    return b.A(model) * math.exp(-alpha / (4 * b.C2))


def bound_b(alpha: float) -> float:
    """Upper bound on P[V <= alpha p^-2], valid for p <= 1/2."""
    return min(1.0, 2 * alpha)


def geometric_comparison_cdf(alpha: float, p: float) -> float:
    """P[G <= alpha p^-2] for G geometric with success probability p^2."""
    if alpha == 0:
        return 0.0
    return 1 - (1 - p * p) ** (alpha / (p * p))


def alpha_threshold(alpha: float, p: float) -> float:
    """alpha p^-2, snapped to the nearest integer when it is one up to rounding."""
    x = alpha / (p * p)
    r = round(x)
    return float(r) if abs(x - r) <= 1e-9 * max(1.0, x) else x


def default_cap(p: float, trials: int) -> int:
    """Street cap with negligible censoring: 20 p^-2 log(trials), at least 1000."""
    if p <= 0:
        return DEFAULT_CAP
    return max(1000, math.ceil(20 / (p * p) * math.log(max(trials, 2))))


@dataclass(frozen=True)
class RunSpec:
    model: str
    params: ModelParams
    trials: int
    master_seed: int
    conditioned: bool = False
    street_cap: Optional[int] = None
    first_direction: str = "E"
    count_loops: bool = False

    def __post_init__(self):
        check_model(self.model)
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.first_direction not in ("E", "W"):
            raise ValueError("first_direction must be 'E' or 'W'")
        if self.street_cap is None:
            object.__setattr__(self, "street_cap", default_cap(self.params.p, self.trials))
        if self.street_cap < 1:
            raise ValueError("street_cap must be positive")
        if self.conditioned and prob_u_le2(self.params) == 0:
            raise ValueError("the conditioned chain is undefined when P[U<=2] = 0")

    @property
    def street_offset(self) -> int:
        return 0 if self.first_direction == "E" else 1


@dataclass
class TrialRecord:
    hitting_time: int
    waiting_times: list[int]
    tau_at_hit: Optional[int]
    censored: bool
    loops_total: Optional[int] = None


def _mirror_count_cdf(params: ModelParams) -> np.ndarray:
    cdf = binom.cdf(np.arange(params.n + 1), params.n, params.p).astype(np.float64)
    cdf[-1] = 1.0
    return cdf


def _conditioned_tables(model: str, params: ModelParams):
    law = conditioned_law(model, params)
    q_id = float(law[0][1])
    n = params.n
    pi, pj, pbar = [], [], []
    for d, _ in law[1:]:
        # recover (i, j, bar) from the generator diagram
        moved = [c for c in range(n) if d.partner[c] != c + n]
        a, b = moved
        pi.append(a)
        pj.append(b)
        pbar.append(d.partner[a] == b)
    return q_id, np.array(pi, dtype=np.int64), np.array(pj, dtype=np.int64), np.array(pbar, dtype=np.bool_)


@dataclass
class BatchResult:
    """Per-trial outputs of ``run_batch`` in trial order.

    ``waiting_times[t, k]`` is the number of streets between the k-th and the
    (k+1)-th bar, 0 when one full-model street added several bars at once and
    -1 when the trial was censored before reaching level k + 1.
    """

    spec: RunSpec
    hitting_time: np.ndarray
    censored: np.ndarray
    tau_at_hit: Optional[np.ndarray]
    waiting_times: np.ndarray
    loops_total: Optional[np.ndarray] = None
    extras: dict = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return int(self.hitting_time.shape[0])

    @property
    def censor_count(self) -> int:
        return int(self.censored.sum())

    def record(self, t: int) -> TrialRecord:
        return TrialRecord(
            hitting_time=int(self.hitting_time[t]),
            waiting_times=[int(w) for w in self.waiting_times[t]],
            tau_at_hit=None if self.tau_at_hit is None else int(self.tau_at_hit[t]),
            censored=bool(self.censored[t]),
            loops_total=None if self.loops_total is None else int(self.loops_total[t]),
        )

    def cdf_counts(self, x: Sequence[float]) -> np.ndarray:
        """Number of uncensored trials with hitting time <= x, for each x."""
        done = np.sort(self.hitting_time[~self.censored])
        return np.searchsorted(done, np.asarray(x, dtype=np.float64), side="right").astype(np.int64)

    def tail_counts(self, x: Sequence[float]) -> np.ndarray:
        """Number of trials with hitting time >= x; censored trials always count."""
        x = np.asarray(x, dtype=np.float64)
        if self.censor_count and np.any(x > self.spec.street_cap):
            raise ValueError("tail thresholds beyond the street cap are not identifiable")
        ht = np.sort(self.hitting_time)
        return (self.trials - np.searchsorted(ht, x, side="left")).astype(np.int64)

    def ecdf(self, x: Sequence[float]) -> np.ndarray:
        return self.cdf_counts(x) / self.trials

    def waiting_samples(self, k: int) -> np.ndarray:
        col = self.waiting_times[:, k]
        return col[col >= 0]

    def to_csv(self) -> str:
        half = self.spec.params.n // 2
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        loops = self.loops_total
        # the loop column only appears when loop counting was requested
        extra = [] if loops is None else ["loops_total"]
        w.writerow(["trial", "hitting_time", "censored", "tau_at_hit"] + [f"w_{k}" for k in range(half)] + extra)
        tau = self.tau_at_hit
        for t in range(self.trials):
            waits = ["" if v < 0 else str(int(v)) for v in self.waiting_times[t]]
            w.writerow(
                [t, int(self.hitting_time[t]), int(bool(self.censored[t])), "" if tau is None else int(tau[t])]
                + waits
                + ([] if loops is None else [int(loops[t])])
            )
        return buf.getvalue()

    def aggregate(self) -> dict:
        """Summary statistics; real values use exact summation so they are order independent."""
        done = self.hitting_time[~self.censored]
        half = self.spec.params.n // 2
        per_k = []
        for k in range(half):
            s = self.waiting_samples(k)
            per_k.append(
                {
                    "k": k,
                    "count": int(s.size),
                    "mean": math.fsum(int(v) for v in s) / s.size if s.size else None,
                    "histogram": {str(v): int(c) for v, c in zip(*np.unique(s, return_counts=True))}
                    if s.size and s.max() < 64
                    else None,
                }
            )
        out = {
            "trials": self.trials,
            "censored": self.censor_count,
            "hitting_time": {
                "mean_uncensored": math.fsum(int(v) for v in done) / done.size if done.size else None,
                "min": int(done.min()) if done.size else None,
                "max": int(done.max()) if done.size else None,
                "quantiles": {
                    str(q): int(np.quantile(done, q, method="inverted_cdf")) if done.size else None
                    for q in (0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99)
                },
            },
            "waiting_times": per_k,
        }
        if self.tau_at_hit is not None:
            out["tau_at_hit_mean"] = math.fsum(int(v) for v in self.tau_at_hit) / self.trials
        if self.loops_total is not None:
            out["loops_total_mean"] = math.fsum(int(v) for v in self.loops_total) / self.trials
        return out


def _run_range(spec: RunSpec, start: int, stop: int, out: dict) -> None:
    params = spec.params
    n = params.n
    seed = np.uint64(spec.master_seed)
    sl = slice(start, stop)
    if spec.conditioned:
        q_id, pi, pj, pbar = _conditioned_tables(spec.model, params)
        _kernels.conditioned_batch(
            seed, start, n, q_id, pi, pj, pbar, spec.street_cap, spec.count_loops,
            out["hit"][sl], out["cens"][sl], out["loops"][sl], out["waits"][sl],
        )
    else:
        _kernels.full_batch(
            seed, start, n, spec.model == "manhattan", spec.street_offset, _mirror_count_cdf(params),
            spec.street_cap, spec.count_loops,
            out["hit"][sl], out["cens"][sl], out["tau"][sl], out["loops"][sl], out["waits"][sl],
        )


def _allocate(spec: RunSpec, trials: int) -> dict:
    return {
        "hit": np.zeros(trials, dtype=np.int64),
        "cens": np.zeros(trials, dtype=np.bool_),
        "tau": np.zeros(trials, dtype=np.int64),
        "loops": np.zeros(trials, dtype=np.int64),
        "waits": np.zeros((trials, spec.params.n // 2), dtype=np.int64),
    }


def run_trial(spec: RunSpec, trial_index: int) -> TrialRecord:
    """Trial ``trial_index`` of ``spec``; identical to the same row of ``run_batch``."""
    out = _allocate(spec, trial_index + 1)
    _run_range(spec, trial_index, trial_index + 1, out)
    return TrialRecord(
        hitting_time=int(out["hit"][trial_index]),
        waiting_times=[int(w) for w in out["waits"][trial_index]],
        tau_at_hit=None if spec.conditioned else int(out["tau"][trial_index]),
        censored=bool(out["cens"][trial_index]),
        loops_total=int(out["loops"][trial_index]) if spec.count_loops else None,
    )


def run_batch(spec: RunSpec, threads: int = 1) -> BatchResult:
    """Run all trials of ``spec``.  Results depend only on ``spec``, never on ``threads``."""
    if threads < 1:
        raise ValueError("threads must be positive")
    out = _allocate(spec, spec.trials)
    bounds = [(s, min(s + CHUNK, spec.trials)) for s in range(0, spec.trials, CHUNK)]
    if threads == 1:
        for s, e in bounds:
            _run_range(spec, s, e, out)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for f in [pool.submit(_run_range, spec, s, e, out) for s, e in bounds]:
                f.result()
    return BatchResult(
        spec=spec,
        hitting_time=out["hit"],
        censored=out["cens"],
        tau_at_hit=None if spec.conditioned else out["tau"],
        waiting_times=out["waits"],
        loops_total=out["loops"] if spec.count_loops else None,
    )


def tau_samples(params: ModelParams, checkpoints: Sequence[int], trials: int, master_seed: int) -> np.ndarray:
    """tau(i) for each checkpoint i, drawn from the full chain's own street stream.

    Row t uses the same street keys as trial t of a full-model ``run_batch``
    with this seed, so ``tau_samples(...)[t, c]`` equals that trial's count of
    streets with at most two mirrors among its first ``checkpoints[c]``.
    """
    cps = np.asarray(sorted(checkpoints), dtype=np.int64)
    if cps.size and cps[0] < 0:
        raise ValueError("checkpoints must be non-negative")
    out = np.zeros((trials, cps.size), dtype=np.int64)
    _kernels.tau_table(np.uint64(master_seed), 0, _mirror_count_cdf(params), cps, out)
    return out


def sampled_streets(spec: RunSpec, trial: int, streets: int) -> tuple[np.ndarray, np.ndarray]:
    """The first ``streets`` street configurations (orientation codes) and diagrams of a full-model trial."""
    n = spec.params.n
    orient = np.zeros((streets, n), dtype=np.int64)
    diags = np.zeros((streets, 2 * n), dtype=np.int64)
    _kernels.sampled_streets(
        np.uint64(spec.master_seed), trial, streets, n, spec.model == "manhattan", spec.street_offset,
        _mirror_count_cdf(spec.params), orient, diags,
    )
    return orient, diags
