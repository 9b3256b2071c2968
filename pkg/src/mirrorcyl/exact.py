"""Exact laws of street products for small widths.

Distributions over diagrams are sparse maps ``canonical_key -> probability``.
``evolve`` is the literal push-forward under ``compose``; ``Propagator`` does
the same computation over an indexed state space with cached products and is
what the CDF routines use.  Iteration is always in sorted-key order so every
output is bit-stable.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .chain import g_param
from .diagrams import (
    Diagram,
    bar_count,
    canonical_key,
    compose,
    identity,
    is_walled,
    to_text,
)
from .lattice import (
    DEFAULT_ENUMERATION_BUDGET,
    BudgetExceeded,
    ModelParams,
    check_model,
    conditioned_law,
    enumerate_streets,
    prob_u_le2,
    trace_street,
)

#: Largest width for which repeated evolution is attempted by default.
MAX_EVOLVE_WIDTH = 6


def _sum(values):
    # exact for Fraction entries, compensated for floats
    values = list(values)
    if any(isinstance(v, Fraction) for v in values):
        return sum(values, Fraction(0))
    return math.fsum(values)


@dataclass
class DistributionVector:
    n: int
    entries: dict[bytes, float]

    @classmethod
    def point_mass(cls, d: Diagram) -> DistributionVector:
        return cls(d.n, {canonical_key(d): 1.0})

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[Diagram, float]]) -> DistributionVector:
        acc: dict[bytes, float] = defaultdict(int)
        for d, w in pairs:
            if d.n != n:
                raise ValueError("width mismatch")
            acc[canonical_key(d)] += w
        return cls(n, {k: acc[k] for k in sorted(acc)})

    def items(self) -> list[tuple[Diagram, float]]:
        return [(Diagram.from_key(k), self.entries[k]) for k in sorted(self.entries)]

    def total(self) -> float:
        return _sum(self.entries.values())

    def prob(self, d: Diagram) -> float:
        return self.entries.get(canonical_key(d), 0.0)

    @property
    def support_size(self) -> int:
        return sum(1 for w in self.entries.values() if w != 0)

    def to_json(self) -> str:
        return json.dumps(
            {to_text(d): float(w) for d, w in self.items()}, indent=1, sort_keys=False
        )


def street_distribution(
    model: str, params: ModelParams, street_index: int = 1, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> DistributionVector:
    """Exact law of one street's diagram in the full model."""
    configs = enumerate_streets(model, params, street_index=street_index, budget=budget)
    return DistributionVector.from_pairs(params.n, ((trace_street(c), w) for c, w in configs))


def conditioned_distribution(model: str, params: ModelParams) -> DistributionVector:
    """The closed-form law of a street given at most two mirrors."""
    return DistributionVector.from_pairs(params.n, conditioned_law(model, params))


def evolve(dist: DistributionVector, step: DistributionVector) -> DistributionVector:
    """Law of ``a * b`` for independent ``a ~ dist`` and ``b ~ step``; loops are dropped."""
    if dist.n != step.n:
        raise ValueError(f"width mismatch: {dist.n} vs {step.n}")
    acc: dict[bytes, float] = defaultdict(int)
    rhs = [(Diagram.from_key(k), step.entries[k]) for k in sorted(step.entries)]
    for ka in sorted(dist.entries):
        wa = dist.entries[ka]
        if wa == 0:
            continue
        a = Diagram.from_key(ka)
        for b, wb in rhs:
            if wb == 0:
                continue
            acc[canonical_key(compose(a, b).diagram)] += wa * wb
    return DistributionVector(dist.n, {k: acc[k] for k in sorted(acc)})


def mass_bars_ge(dist: DistributionVector, k: int):
    return _sum(w for key, w in dist.entries.items() if bar_count(Diagram.from_key(key)) >= k)


class Propagator:
    """Repeated right-multiplication by a cyclic sequence of step laws.

    States are indexed as they are discovered; for each step law and each of
    its support diagrams the product table ``state -> state`` is extended
    lazily, so each pair is composed once.
    """

    def __init__(self, steps: Sequence[DistributionVector], start: Optional[Diagram] = None,
                 max_states: Optional[int] = None):
        if not steps:
            raise ValueError("need at least one step law")
        self.n = steps[0].n
        if any(s.n != self.n for s in steps):
            raise ValueError("width mismatch among step laws")
        self.max_states = max_states
        self._steps = []
        for s in steps:
            items = [(d, w) for d, w in s.items() if w != 0]
            self._steps.append(([d for d, _ in items], np.array([w for _, w in items], dtype=np.float64), []))
        self._states: list[Diagram] = []
        self._index: dict[bytes, int] = {}
        self._bars: list[int] = []
        start = identity(self.n) if start is None else start
        self._add(start)
        self.probs = np.array([1.0])
        self.t = 0

    def _add(self, d: Diagram) -> int:
        key = canonical_key(d)
        idx = self._index.get(key)
        if idx is None:
            idx = len(self._states)
            if self.max_states is not None and idx >= self.max_states:
                raise BudgetExceeded(f"more than {self.max_states} reachable diagrams")
            self._index[key] = idx
            self._states.append(d)
            self._bars.append(bar_count(d))
        return idx

    def _table(self, which: int) -> list[np.ndarray]:
        diagrams, _, tables = self._steps[which]
        if not tables:
            tables.extend(np.zeros(0, dtype=np.int64) for _ in diagrams)
        have = tables[0].shape[0]
        # _add may grow the state list while we extend, so loop until closed
        while have < len(self._states):
            upto = len(self._states)
            for m, g in enumerate(diagrams):
                ext = [self._add(compose(self._states[s], g).diagram) for s in range(have, upto)]
                tables[m] = np.concatenate([tables[m], np.array(ext, dtype=np.int64)])
            have = upto
        return tables

    def step(self) -> np.ndarray:
        which = self.t % len(self._steps)
        _, weights, _ = self._steps[which]
        tables = self._table(which)
        size = len(self._states)
        new = np.zeros(size)
        v = self.probs
        for m in range(len(weights)):
            new += np.bincount(tables[m][: v.shape[0]], weights=v * weights[m], minlength=size)
        self.probs = new
        self.t += 1
        return new

    @property
    def bars(self) -> np.ndarray:
        return np.array(self._bars[: self.probs.shape[0]], dtype=np.int64)

    def mass_bars_ge(self, k: int) -> float:
        return float(self.probs[self.bars >= k].sum())

    def bar_masses(self) -> np.ndarray:
        """Probability of exactly k bars, for k = 0..n/2."""
        return np.bincount(self.bars, weights=self.probs, minlength=self.n // 2 + 1)

    def distribution(self) -> DistributionVector:
        return DistributionVector.from_pairs(
            self.n, ((self._states[i], float(w)) for i, w in enumerate(self.probs))
        )

    def walled_support(self) -> bool:
        return all(is_walled(self._states[i]) for i, w in enumerate(self.probs) if w > 0)


def _check_width(params: ModelParams, max_width: int) -> None:
    if params.n > max_width:
        raise BudgetExceeded(f"width {params.n} exceeds the exact-evolution limit {max_width}")


def step_laws(
    model: str, params: ModelParams, conditioned: bool, first_direction: str = "E",
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> list[DistributionVector]:
    """Step laws in street order: one law for iid streets, two alternating ones for Manhattan."""
    check_model(model)
    if conditioned:
        return [conditioned_distribution(model, params)]
    if model == "mirror":
        return [street_distribution(model, params, budget=budget)]
    first = 1 if first_direction == "E" else 2
    return [
        street_distribution(model, params, street_index=first, budget=budget),
        street_distribution(model, params, street_index=first + 1, budget=budget),
    ]


def hitting_cdf(
    model: str, params: ModelParams, conditioned: bool, i_max: int, first_direction: str = "E",
    max_width: int = MAX_EVOLVE_WIDTH, budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> np.ndarray:
    """Exact P[hit <= i] for i = 1..i_max, hit being V (full) or W (conditioned)."""
    _check_width(params, max_width)
    prop = Propagator(step_laws(model, params, conditioned, first_direction, budget))
    half = params.n // 2
    out = np.empty(i_max)
    for i in range(i_max):
        prop.step()
        out[i] = prop.mass_bars_ge(half)
    return out


def w_exact_cdf(model: str, params: ModelParams, i_max: int,
                g: Callable[[str, ModelParams, int], float] = g_param) -> np.ndarray:
    """P[W <= i], i = 1..i_max, as the law of a sum of independent geometric waits."""
    pmf = np.zeros(i_max + 1)
    pmf[0] = 1.0
    i = np.arange(i_max + 1)
    for k in range(params.n // 2):
        gk = g(model, params, k)
        geo = np.where(i >= 1, gk * (1 - gk) ** np.maximum(i - 1, 0), 0.0)
        pmf = np.convolve(pmf, geo)[: i_max + 1]
    return np.cumsum(pmf)[1:]


def _binom_pmf(i: int, q: float) -> np.ndarray:
    t = np.arange(i + 1)
    return np.array([math.comb(i, int(s)) for s in t], dtype=np.float64) * q**t * (1 - q) ** (i - t)


def domination_table(model: str, params: ModelParams, i_max: int, first_direction: str = "E",
                     max_width: int = MAX_EVOLVE_WIDTH) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the comparison between the full and the conditioned chain.

    Returns ``(lhs, rhs)`` of shape ``(i_max + 1, n/2 + 1)``:
    ``lhs[i, k] = P[Z^[i] has >= k bars]`` and
    ``rhs[i, k] = sum_t Binom(i, P[U<=2])(t) P[X^t has >= k bars]``.
    """
    _check_width(params, max_width)
    half = params.n // 2
    full = Propagator(step_laws(model, params, False, first_direction))
    cond = Propagator(step_laws(model, params, True))

    def at_least(prop: Propagator) -> np.ndarray:
        exact = prop.bar_masses()
        return np.cumsum(exact[::-1])[::-1]

    lhs = np.zeros((i_max + 1, half + 1))
    xt = np.zeros((i_max + 1, half + 1))
    lhs[0] = at_least(full)
    xt[0] = at_least(cond)
    for i in range(1, i_max + 1):
        full.step()
        cond.step()
        lhs[i] = at_least(full)
        xt[i] = at_least(cond)
    u = prob_u_le2(params)
    rhs = np.array([_binom_pmf(i, u) @ xt[: i + 1] for i in range(i_max + 1)])
    return lhs, rhs


def domination_check(model: str, params: ModelParams, k: int, i: int, first_direction: str = "E") -> tuple[float, float]:
    """(P[V_k <= i], P[W_k <= tau(i)]) computed exactly."""
    if not 0 <= k <= params.n // 2:
        raise ValueError("k out of range")
    lhs, rhs = domination_table(model, params, i, first_direction)
    return float(lhs[i, k]), float(rhs[i, k])


def bar_increment_probability(model: str, params: ModelParams, k: int, b: Diagram) -> float:
    """Probability that one conditioned street takes b from k to k + 1 bars."""
    check_model(model)
    if b.n != params.n or bar_count(b) != k:
        raise ValueError(f"b must be a width-{params.n} diagram with exactly {k} bars")
    if model == "manhattan" and not is_walled(b):
        raise ValueError("Manhattan check requires a walled diagram")
    total = []
    for x, w in conditioned_law(model, params):
        if bar_count(compose(b, x).diagram) == k + 1:
            total.append(w)
    return math.fsum(total)


# names used by the published interface
lemma3_exact_check = bar_increment_probability
lemma56_check = domination_check


def max_bar_jump(model: str, params: ModelParams, b: Diagram) -> int:
    """Largest change in bar count of b over the conditioned law's support."""
    k = bar_count(b)
    return max(abs(bar_count(compose(b, x).diagram) - k) for x, w in conditioned_law(model, params) if w > 0)


def cdf_csv(cdf: Sequence[float]) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "cdf"])
    for i, v in enumerate(cdf, start=1):
        w.writerow([i, repr(float(v))])
    return buf.getvalue()
