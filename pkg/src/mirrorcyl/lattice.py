"""Street configurations of the mirror and Manhattan models on the n-cylinder.

A street is the cycle C_n of sites 1..n.  Each site has four half-edges: the
vertical ones N and S (which become the boundary vertices ``x+`` and ``x-`` of
the street's diagram) and the horizontal arcs E and W; arc E of site x is
joined to arc W of site x+1 (mod n).  Mirrors pair the half-edges of their
site as follows::

    empty   N-S  E-W
    NE "/"  N-E  S-W
    NW "\\"  N-W  S-E

In the Manhattan model the mirror at site x of street t is NW when x + t is
odd and NE when it is even.  Street 1 is eastbound and directions alternate;
the direction is carried as metadata only, tracing does not depend on it.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .diagrams import Diagram, bar_pair, identity, transposition

MODELS = ("mirror", "manhattan")

#: Default cap on the number of configurations ``enumerate_streets`` will list.
#: 3**8 admits the full mirror model up to n = 8 and Manhattan up to n = 12.
DEFAULT_ENUMERATION_BUDGET = 3**8


class BudgetExceeded(RuntimeError):
    """An exact computation would exceed its configured size budget."""


class MirrorOrientation(enum.Enum):
    NE = "/"
    NW = "\\"


def check_model(model: str) -> str:
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    return model


@dataclass(frozen=True)
class ModelParams:
    """Cylinder width ``n``, mirror probability ``p`` and density constant ``C``.

    ``C`` only enters the bound formulas; when omitted it defaults to ``n * p``,
    the smallest constant with ``p <= C / n``.
    """

    n: int
    p: float
    C: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise TypeError("n must be an integer")
        if self.n < 2 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 2, got {self.n}")
        if not 0 <= self.p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.C is not None and self.C < 0:
            raise ValueError("C must be non-negative")
        object.__setattr__(self, "n", int(self.n))

    @property
    def density(self) -> float:
        return self.n * self.p if self.C is None else self.C

    def in_regime(self) -> bool:
        """Whether ``p <= C / n`` holds for the configured constant."""
        return self.C is not None and self.p <= self.C / self.n


@dataclass(frozen=True)
class StreetConfig:
    n: int
    sites: tuple[Optional[MirrorOrientation], ...]
    model: str = "mirror"
    street_index: int = 1

    def __post_init__(self):
        check_model(self.model)
        object.__setattr__(self, "sites", tuple(self.sites))
        if len(self.sites) != self.n or self.n < 2 or self.n % 2:
            raise ValueError("sites must have one entry per site of an even-width street")
        if self.street_index < 1:
            raise ValueError("street_index is 1-based")
        if self.model == "manhattan":
            for x, o in enumerate(self.sites, start=1):
                if o is not None and o is not manhattan_orientation(x, self.street_index):
                    raise ValueError(f"site {x} violates the Manhattan parity rule")

    @property
    def mirror_count(self) -> int:
        return sum(o is not None for o in self.sites)

    @property
    def direction(self) -> str:
        return "E" if self.street_index % 2 else "W"

    def to_string(self) -> str:
        return "".join("." if o is None else o.value for o in self.sites)

    @classmethod
    def from_string(cls, text: str, model: str = "mirror", street_index: int = 1) -> StreetConfig:
        lookup = {".": None, "/": MirrorOrientation.NE, "\\": MirrorOrientation.NW}
        try:
            sites = tuple(lookup[ch] for ch in text)
        except KeyError as exc:
            raise ValueError(f"unknown site character {exc.args[0]!r}") from None
        return cls(len(sites), sites, model, street_index)


def manhattan_orientation(x: int, t: int) -> MirrorOrientation:
    return MirrorOrientation.NW if (x + t) % 2 else MirrorOrientation.NE


def sample_street_mirror(params: ModelParams, rng: np.random.Generator, street_index: int = 1) -> StreetConfig:
    occupied = rng.random(params.n) < params.p
    flips = rng.random(params.n) < 0.5
    sites = tuple(
        (MirrorOrientation.NE if f else MirrorOrientation.NW) if occ else None
        for occ, f in zip(occupied, flips)
    )
    return StreetConfig(params.n, sites, "mirror", street_index)


def sample_street_manhattan(params: ModelParams, t: int, rng: np.random.Generator) -> StreetConfig:
    occupied = rng.random(params.n) < params.p
    sites = tuple(
        manhattan_orientation(x, t) if occ else None for x, occ in enumerate(occupied, start=1)
    )
    return StreetConfig(params.n, sites, "manhattan", t)


def sample_street(model: str, params: ModelParams, rng: np.random.Generator, street_index: int = 1) -> StreetConfig:
    if check_model(model) == "mirror":
        return sample_street_mirror(params, rng, street_index)
    return sample_street_manhattan(params, street_index, rng)


# half-edge codes
_N, _S, _E, _W = 0, 1, 2, 3
_LOCAL = {
    None: {_N: _S, _S: _N, _E: _W, _W: _E},
    MirrorOrientation.NE: {_N: _E, _E: _N, _S: _W, _W: _S},
    MirrorOrientation.NW: {_N: _W, _W: _N, _S: _E, _E: _S},
}


def _follow(sites: Sequence[Optional[MirrorOrientation]], x: int, side: int) -> tuple[int, int]:
    """Walk from half-edge (x, side) until a vertical half-edge is reached."""
    n = len(sites)
    h = _LOCAL[sites[x]][side]
    steps = 0
    while h in (_E, _W):
        if h == _E:
            x, side = (x + 1) % n, _W
        else:
            x, side = (x - 1) % n, _E
        h = _LOCAL[sites[x]][side]
        steps += 1
        if steps > n:
            raise AssertionError("tracing entered a closed horizontal circuit")
    return x, h


def trace_street(config: StreetConfig) -> Diagram:
    """The diagram formed by the paths through one street."""
    n = config.n
    partner = [-1] * (2 * n)
    for x in range(n):
        for side, slot in ((_N, x), (_S, n + x)):
            if partner[slot] >= 0:
                continue
            y, end = _follow(config.sites, x, side)
            other = y if end == _N else n + y
            partner[slot], partner[other] = other, slot
    return Diagram(n, partner)


def prob_u_le2(params: ModelParams) -> float:
    """Probability that a street carries at most two mirrors."""
    n, p = params.n, params.p
    q = 1 - p
    return q ** (n - 2) * (q * q + n * p * q + math.comb(n, 2) * p * p)


def conditioned_law(model: str, params: ModelParams) -> list[tuple[Diagram, float]]:
    """Closed-form law of a street's diagram given at most two mirrors.

    Returns ``(diagram, probability)`` pairs with the identity first, then the
    non-identity diagrams ordered by (i, j) and with the transposition before
    the bar for the same pair.  Zero-probability entries are kept so that the
    support does not depend on p.
    """
    check_model(model)
    n, p = params.n, params.p
    q = 1 - p
    norm = prob_u_le2(params)
    if norm == 0:
        raise ValueError("a street has at most two mirrors with probability zero")
    scale = q ** (n - 2) / norm
    law = [(identity(n), scale * (n * p * q + q * q))]
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if model == "mirror":
                law.append((transposition(n, i, j), scale * p * p / 2))
                law.append((bar_pair(n, i, j), scale * p * p / 2))
            elif (j - i) % 2 == 0:
                law.append((transposition(n, i, j), scale * p * p))
            else:
                law.append((bar_pair(n, i, j), scale * p * p))
    return law


def sample_conditioned_X(model: str, params: ModelParams, rng: np.random.Generator) -> Diagram:
    """Draw one street diagram from the conditioned (at most two mirrors) law."""
    law = conditioned_law(model, params)
    weights = np.array([w for _, w in law])
    u = rng.random()
    if u < weights[0]:
        return law[0][0]
    # the non-identity entries are equally weighted
    k = int(rng.integers(1, len(law)))
    return law[k][0]


def enumerate_streets(
    model: str,
    params: ModelParams,
    max_mirrors: Optional[int] = None,
    street_index: int = 1,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> list[tuple[StreetConfig, float]]:
    """Every street configuration with at most ``max_mirrors`` mirrors and its probability.

    Probabilities are products of ``p`` and ``1 - p`` in whatever numeric type
    ``params.p`` carries, so passing a ``fractions.Fraction`` gives exact
    values.
    """
    check_model(model)
    n, p = params.n, params.p
    top = n if max_mirrors is None else min(max_mirrors, n)
    per_choice = 2 if model == "mirror" else 1
    count = sum(math.comb(n, r) * per_choice**r for r in range(top + 1))
    if count > budget:
        raise BudgetExceeded(f"{count} configurations exceed the budget of {budget}")

    q = 1 - p
    out = []
    for r in range(top + 1):
        weight = p**r * q ** (n - r)
        for positions in itertools.combinations(range(n), r):
            if model == "manhattan":
                sites = [None] * n
                for x in positions:
                    sites[x] = manhattan_orientation(x + 1, street_index)
                out.append((StreetConfig(n, tuple(sites), model, street_index), weight))
                continue
            for orients in itertools.product(MirrorOrientation, repeat=r):
                sites = [None] * n
                for x, o in zip(positions, orients):
                    sites[x] = o
                out.append((StreetConfig(n, tuple(sites), model, street_index), weight / 2**r))
    return out
