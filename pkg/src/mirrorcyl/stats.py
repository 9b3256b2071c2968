"""Interval estimates and goodness-of-fit checks used against exact values and bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import kstwo, norm


@dataclass(frozen=True)
class IntervalEstimate:
    point: float
    lower: float
    upper: float
    trials: int


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> IntervalEstimate:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    phat = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z / denom * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials))
    lower = 0.0 if successes == 0 else max(0.0, center - half)
    upper = 1.0 if successes == trials else min(1.0, center + half)
    return IntervalEstimate(phat, min(lower, phat), max(upper, phat), trials)


def one_sided_z(level: float, tests: int = 1) -> float:
    """Normal quantile for a one-sided test at ``level`` with Bonferroni over ``tests``."""
    return float(norm.isf(level / tests))


def geometric_cdf(x, g: float):
    """P[G <= x] for G geometric on {1, 2, ...} with success probability g."""
    x = np.floor(np.asarray(x, dtype=np.float64))
    return np.where(x >= 1, 1 - (1 - g) ** np.maximum(x, 0), 0.0)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    critical: float
    level: float
    samples: int
    passed: bool


def ks_geometric(samples: Sequence[int], param: float, level: float = 0.01) -> KSResult:
    """One-sample KS test of integer samples against Geometric(param) on {1, 2, ...}.

    The critical value is the continuous-distribution one, which is
    conservative for a discrete null.
    """
    x = np.asarray(samples, dtype=np.int64)
    if x.size == 0:
        raise ValueError("no samples")
    if not 0 < param <= 1:
        raise ValueError("param must lie in (0, 1]")
    if param == 1:
        # Geometric(1) is the point mass at 1
        d = float(np.mean(x != 1))
        return KSResult(d, 0.0, level, int(x.size), d == 0.0)
    hi = int(x.max())
    grid = np.arange(0, hi + 1)
    # F_n and F jump only at integers; compare both right-continuous values
    # and left limits (the value at x - 1) on the whole observed range.
    emp = np.searchsorted(np.sort(x), grid, side="right") / x.size
    ref = geometric_cdf(grid, param)
    d = float(np.max(np.abs(emp - ref)))
    if x.min() < 1:
        d = max(d, 1.0)
    crit = float(kstwo.isf(level, x.size))
    return KSResult(d, crit, level, int(x.size), d <= crit)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    statistic: float
    threshold: float
    verdict: str  # "pass", "violation" or "vacuous"
    estimate: Optional[IntervalEstimate] = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "statistic": self.statistic, "threshold": self.threshold, "verdict": self.verdict}
        if self.estimate is not None:
            out["estimate"] = asdict(self.estimate)
        return out


def tail_vs_bound(
    names: Sequence[str],
    successes: Sequence[int],
    trials: int,
    bounds: Sequence[float],
    level: float = 0.01,
    side: str = "lower",
) -> list[BoundCheck]:
    """Compare empirical probabilities against upper bounds, one-sided.

    Points whose bound is at least 1 say nothing and are reported as vacuous.
    With ``side="lower"`` a point is a violation when the lower confidence
    limit exceeds the bound (evidence against the bound); with
    ``side="upper"`` the stricter requirement is that the upper confidence
    limit stays below the bound.  The level is Bonferroni-split over the
    non-vacuous points.
    """
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    live = [b < 1 for b in bounds]
    z = one_sided_z(level, max(1, sum(live)))
    out = []
    for name, s, b, ok in zip(names, successes, bounds, live):
        est = wilson_interval(int(s), trials, z)
        stat = est.lower if side == "lower" else est.upper
        if not ok:
            verdict = "vacuous"
        elif stat > b:
            verdict = "violation"
        else:
            verdict = "pass"
        out.append(BoundCheck(name, stat, float(b), verdict, est))
    return out


def hoeffding_tau_check(i: int, prob_u_le2: float, tau_samples: Sequence[int], C: float,
                        level: float = 0.01) -> dict:
    """Empirical P[tau(i) <= C3 i / 2] against both Hoeffding bounds.

    The first bound, exp(-2i(P[U<=2] - C3/2)^2), applies when P[U<=2] > C3/2;
    the second, exp(-2i(C3/4)^2), additionally needs P[U<=2] >= 3 C3 / 4.
    A check fails only when the empirical lower confidence limit exceeds the
    bound in force.
    """
    tau = np.asarray(tau_samples)
    if tau.size == 0:
        raise ValueError("no samples")
    c3 = math.exp(-C) * (1 + C + C * C / 2)
    threshold = c3 * i / 2
    hits = int(np.count_nonzero(tau <= threshold))
    est = wilson_interval(hits, int(tau.size), one_sided_z(level))
    gap = prob_u_le2 - c3 / 2
    first = math.exp(-2 * i * gap * gap) if gap > 0 else 1.0
    second = math.exp(-2 * i * (c3 / 4) ** 2) if prob_u_le2 >= 3 * c3 / 4 else None
    checks = []
    for name, bound in (("hoeffding", first), ("hoeffding_c3", second)):
        if bound is None:
            checks.append({"name": name, "statistic": est.lower, "threshold": None, "verdict": "not-applicable"})
            continue
        verdict = "violation" if est.lower > bound else "pass"
        checks.append({"name": name, "statistic": est.lower, "threshold": bound, "verdict": verdict})
    return {
        "i": i,
        "threshold_tau": threshold,
        "empirical": est.point,
        "estimate": asdict(est),
        "checks": checks,
        "passed": all(c["verdict"] != "violation" for c in checks),
    }
