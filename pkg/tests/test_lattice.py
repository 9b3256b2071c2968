import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from mirrorcyl import _kernels
from mirrorcyl.diagrams import Diagram, bar_count, bar_pair, canonical_key, identity, is_walled, transposition
from mirrorcyl.lattice import (
    BudgetExceeded,
    MirrorOrientation,
    ModelParams,
    StreetConfig,
    _follow,
    conditioned_law,
    enumerate_streets,
    manhattan_orientation,
    prob_u_le2,
    sample_conditioned_X,
    sample_street,
    sample_street_manhattan,
    sample_street_mirror,
    trace_street,
)

from conftest import streets

NE, NW = MirrorOrientation.NE, MirrorOrientation.NW
CODES = {None: 0, NE: 1, NW: 2}


def kernel_trace(cfg: StreetConfig) -> Diagram:
    orient = np.array([CODES[o] for o in cfg.sites], dtype=np.int64)
    out = np.empty(2 * cfg.n, dtype=np.int64)
    _kernels.trace_into(orient, out, cfg.n)
    return Diagram(cfg.n, [int(v) for v in out])


class TestParams:
    @pytest.mark.parametrize("n,p", [(3, 0.1), (0, 0.1), (4, -0.1), (4, 1.5)])
    def test_rejects(self, n, p):
        with pytest.raises(ValueError):
            ModelParams(n, p)

    def test_regime(self):
        assert ModelParams(40, 1 / 40, 1.0).in_regime()
        assert not ModelParams(40, 0.1, 1.0).in_regime()
        assert ModelParams(10, 0.2).density == pytest.approx(2.0)


class TestOrientation:
    def test_examples(self):
        assert manhattan_orientation(1, 1) is NE
        assert manhattan_orientation(2, 1) is NW
        assert [manhattan_orientation(x, 2) for x in range(1, 5)] == [NW, NE, NW, NE]

    def test_parity_rule_enforced(self):
        with pytest.raises(ValueError):
            StreetConfig.from_string("\\...", "manhattan", 1)
        assert StreetConfig.from_string("/\\/\\", "manhattan", 1).mirror_count == 4

    def test_string_round_trip(self):
        s = "./\\."
        cfg = StreetConfig.from_string(s)
        assert cfg.to_string() == s
        assert cfg.direction == "E"
        assert StreetConfig.from_string(s, street_index=2).direction == "W"
        with pytest.raises(ValueError):
            StreetConfig.from_string("x./.")


class TestTrace:
    def test_empty_street(self):
        assert trace_street(StreetConfig.from_string("....")) == identity(4)

    def test_n2_hand_traces(self):
        assert trace_street(StreetConfig.from_string("//")) == transposition(2, 1, 2)
        assert trace_street(StreetConfig.from_string("/\\")) == bar_pair(2, 1, 2)
        assert trace_street(StreetConfig.from_string("\\\\")) == transposition(2, 1, 2)

    @pytest.mark.parametrize("s", ["/...", "..\\.", "...../", "\\....."])
    def test_single_mirror_is_identity(self, s):
        assert trace_street(StreetConfig.from_string(s)) == identity(len(s))

    def test_two_mirrors_split_evenly(self):
        n = 6
        for i in range(n):
            for j in range(i + 1, n):
                got = Counter()
                for a in (NE, NW):
                    for b in (NE, NW):
                        sites = [None] * n
                        sites[i], sites[j] = a, b
                        got[trace_street(StreetConfig(n, tuple(sites)))] += 1
                assert got == {transposition(n, i + 1, j + 1): 2, bar_pair(n, i + 1, j + 1): 2}


@given(streets("mirror"))
def test_trace_is_reversible(cfg):
    n = cfg.n
    for x in range(n):
        for side in (0, 1):
            y, end = _follow(cfg.sites, x, side)
            assert _follow(cfg.sites, y, end) == (x, side)


@given(streets("mirror"))
def test_kernel_trace_matches_reference(cfg):
    assert kernel_trace(cfg) == trace_street(cfg)


@given(streets("manhattan"))
def test_manhattan_streets_are_walled(cfg):
    d = trace_street(cfg)
    assert is_walled(d)
    assert kernel_trace(cfg) == d


class TestSampling:
    def test_p0_and_p1(self, rng):
        assert sample_street_mirror(ModelParams(6, 0.0), rng).mirror_count == 0
        full = sample_street_mirror(ModelParams(6, 1.0), rng)
        assert full.mirror_count == 6
        m = sample_street_manhattan(ModelParams(6, 1.0), 1, rng)
        assert m.to_string() == "/\\/\\/\\"
        assert sample_street_manhattan(ModelParams(6, 0.0), 3, rng).mirror_count == 0

    def test_mirror_frequency(self, rng):
        n, p, count = 8, 0.05, 100_000
        params = ModelParams(n, p)
        total = sum(sample_street_mirror(params, rng).mirror_count for _ in range(count))
        se = math.sqrt(p * (1 - p) / (count * n))
        assert abs(total / (count * n) - p) < 3 * se

    def test_orientation_balance(self, rng):
        ne = nw = 0
        for _ in range(2000):
            for o in sample_street_mirror(ModelParams(4, 1.0), rng).sites:
                ne += o is NE
                nw += o is NW
        assert abs(ne - nw) < 3 * math.sqrt(ne + nw)

    def test_manhattan_samples_walled(self, rng):
        params = ModelParams(8, 0.3)
        for t in range(1, 10_001):
            assert is_walled(trace_street(sample_street("manhattan", params, rng, t)))


class TestConditionedLaw:
    def test_prob_u_le2(self):
        assert prob_u_le2(ModelParams(4, 0.0)) == 1
        assert prob_u_le2(ModelParams(4, 0.1)) == pytest.approx(0.81 * 1.23, abs=1e-15)
        for p in (0.0, 0.3, 1.0):
            assert prob_u_le2(ModelParams(2, p)) == pytest.approx(1.0, abs=1e-15)

    def test_n2_mirror_weights(self):
        p = 0.3
        law = dict(conditioned_law("mirror", ModelParams(2, p)))
        assert law[identity(2)] == pytest.approx((1 - p) ** 2 + 2 * p * (1 - p))
        assert law[transposition(2, 1, 2)] == pytest.approx(p * p / 2)
        assert law[bar_pair(2, 1, 2)] == pytest.approx(p * p / 2)
        assert math.fsum(law.values()) == pytest.approx(1.0, abs=1e-15)

    def test_manhattan_n4_support(self):
        law = [(d, w) for d, w in conditioned_law("manhattan", ModelParams(4, 0.2)) if d != identity(4)]
        expected = {transposition(4, 1, 3), transposition(4, 2, 4), bar_pair(4, 1, 2), bar_pair(4, 1, 4),
                    bar_pair(4, 2, 3), bar_pair(4, 3, 4)}
        assert {d for d, _ in law} == expected
        assert len({w for _, w in law}) == 1

    def test_p0_identity(self, rng):
        for model in ("mirror", "manhattan"):
            assert sample_conditioned_X(model, ModelParams(6, 0.0), rng) == identity(6)

    @pytest.mark.parametrize("model", ["mirror", "manhattan"])
    def test_sampler_frequencies(self, rng, model):
        params = ModelParams(4, 0.4)
        law = dict(conditioned_law(model, params))
        draws = 40_000
        counts = Counter(sample_conditioned_X(model, params, rng) for _ in range(draws))
        for d, w in law.items():
            assert abs(counts[d] / draws - w) < 4 * math.sqrt(w * (1 - w) / draws) + 1e-12

    @pytest.mark.parametrize("model", ["mirror", "manhattan"])
    @pytest.mark.parametrize("n", [2, 4, 6, 8])
    @pytest.mark.parametrize("p", [0.05, 0.3])
    def test_matches_enumeration(self, model, n, p):
        params = ModelParams(n, p)
        acc = Counter()
        for cfg, w in enumerate_streets(model, params, max_mirrors=2):
            acc[canonical_key(trace_street(cfg))] += w
        norm = prob_u_le2(params)
        closed = {canonical_key(d): w for d, w in conditioned_law(model, params)}
        for k in set(acc) | set(closed):
            assert abs(acc[k] / norm - closed.get(k, 0.0)) <= 1e-12


class TestEnumeration:
    def test_counts(self):
        assert len(enumerate_streets("mirror", ModelParams(2, 0.5))) == 9
        assert len(enumerate_streets("manhattan", ModelParams(2, 0.5))) == 4

    @pytest.mark.parametrize("model,n", [("mirror", 6), ("manhattan", 10)])
    def test_total_probability(self, model, n):
        total = math.fsum(w for _, w in enumerate_streets(model, ModelParams(n, 0.17)))
        assert abs(total - 1) <= 1e-15

    def test_capped_total(self):
        params = ModelParams(6, 0.2)
        total = math.fsum(w for _, w in enumerate_streets("mirror", params, max_mirrors=2))
        assert total == pytest.approx(prob_u_le2(params), abs=1e-15)

    def test_exact_fractions(self):
        params = ModelParams(2, Fraction(1, 3))
        total = sum(w for _, w in enumerate_streets("mirror", params))
        assert total == 1 and isinstance(total, Fraction)

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            enumerate_streets("mirror", ModelParams(10, 0.1))
        assert len(enumerate_streets("manhattan", ModelParams(12, 0.1))) == 2**12


def _swap(o):
    return None if o is None else (NW if o is NE else NE)


def _reverse_columns(d: Diagram) -> Diagram:
    n = d.n
    col = lambda v: (v // n) * n + (n - 1 - v % n)  # noqa: E731
    partner = [0] * (2 * n)
    for v, w in enumerate(d.partner):
        partner[col(v)] = col(w)
    return Diagram(n, partner)


@given(streets("mirror"))
def test_left_right_reflection(cfg):
    # reflecting the street swaps "/" and "\" and reverses the columns of its diagram
    refl = StreetConfig(cfg.n, tuple(_swap(o) for o in reversed(cfg.sites)), "mirror")
    assert trace_street(refl) == _reverse_columns(trace_street(cfg))


@given(streets("manhattan"))
def test_global_flip_is_a_street_shift(cfg):
    # swapping every orientation gives a valid street of the opposite direction
    flipped = StreetConfig(cfg.n, tuple(_swap(o) for o in cfg.sites), "manhattan", cfg.street_index + 1)
    assert is_walled(trace_street(flipped))
