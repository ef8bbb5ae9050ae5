"""Multi-level pairing models in the quasi-spin formulation.

Each single-particle level p carries an su(2) quasi-spin j_p equal to half
its pair capacity, a single-particle energy epsilon_p, and optionally a
seniority count of unpaired particles. Unpaired particles block one magnetic
substate each, so a level with seniority nu_p behaves like a level with
effective quasi-spin j_p - nu_p/2 while its blocked particles contribute the
constant energy nu_p * epsilon_p. Everything downstream works with the
effective quasi-spins.

Basis states of the N-pair problem are quasi-spin product states
|m_1 ... m_k> with m_p = n_p - j_p, where n_p counts pairs in level p and
sum_p n_p = N. Projections are stored as twice-integers so half-integer
spins stay exact in all combinatorial factors.
"""

from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_STATE_CAP = 10_000_000


def _twice(value: float, what: str) -> int:
    """Round value to a twice-integer, rejecting anything off the half-integer grid."""
    doubled = 2.0 * float(value)
    twice = round(doubled)
    if abs(doubled - twice) > 1e-9:
        raise ValueError(f"{what} must be an integer or half-integer, got {value}")
    return int(twice)


def _as_int(value, what: str) -> int:
    try:
        return operator.index(value)
    except TypeError:
        raise ValueError(f"{what} must be an integer, got {value!r}") from None


@dataclass(frozen=True)
class LevelSpec:
    """One single-particle level: quasi-spin j, energy epsilon, seniority count."""

    j: float
    epsilon: float
    seniority: int = 0

    def __post_init__(self):
        two_j = _twice(self.j, "j")
        if two_j <= 0:
            raise ValueError(f"quasi-spin must be positive, got j={self.j}")
        seniority = _as_int(self.seniority, "seniority")
        object.__setattr__(self, "seniority", seniority)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "j", two_j / 2.0)
        if not math.isfinite(self.epsilon):
            raise ValueError("epsilon must be finite")
        if seniority < 0:
            raise ValueError(f"seniority must be non-negative, got {seniority}")
        if seniority > two_j:
            raise ValueError(
                f"seniority {seniority} exceeds the level capacity 2j = {two_j}"
            )

    @property
    def two_j(self) -> int:
        return round(2 * self.j)

    @property
    def two_j_eff(self) -> int:
        """Twice the effective quasi-spin, 2j - seniority."""
        return self.two_j - self.seniority

    @property
    def j_eff(self) -> float:
        return self.two_j_eff / 2.0


@dataclass(frozen=True, eq=False)
class PairingModel:
    """Validated pairing problem: levels, symmetric couplings G, pair number N.

    The quasi-spin arrays exposed here are the effective ones (seniority
    already folded in); `seniority_energy_offset` carries the energy of the
    unpaired particles and is added to every diagonal matrix element.
    """

    levels: tuple[LevelSpec, ...]
    G: np.ndarray
    N: int
    seniority_energy_offset: float

    @property
    def k(self) -> int:
        return len(self.levels)

    @property
    def epsilon(self) -> np.ndarray:
        return np.array([lv.epsilon for lv in self.levels])

    @property
    def j_eff(self) -> np.ndarray:
        return np.array([lv.j_eff for lv in self.levels])

    @property
    def two_j_eff(self) -> np.ndarray:
        return np.array([lv.two_j_eff for lv in self.levels], dtype=np.int64)

    @property
    def max_pairs(self) -> int:
        """Total pair capacity sum_p 2 j_eff,p."""
        return int(sum(lv.two_j_eff for lv in self.levels))


def build_model(levels, G, N) -> PairingModel:
    """Validate and assemble a PairingModel.

    G must be a k x k matrix, exactly symmetric as stored (asymmetric input is
    rejected rather than symmetrized). N counts pairs and must fit the total
    capacity of the effective quasi-spins.
    """
    levels = tuple(levels)
    if not levels:
        raise ValueError("a model needs at least one level")
    if not all(isinstance(lv, LevelSpec) for lv in levels):
        raise ValueError("levels must be LevelSpec instances")
    k = len(levels)

    G = np.array(G, dtype=float)
    if G.shape != (k, k):
        raise ValueError(f"G must have shape ({k}, {k}), got {G.shape}")
    if not np.all(np.isfinite(G)):
        raise ValueError("G must be finite")
    if not np.array_equal(G, G.T):
        raise ValueError("G must be exactly symmetric")

    N = _as_int(N, "N")
    capacity = sum(lv.two_j_eff for lv in levels)
    if not 0 <= N <= capacity:
        raise ValueError(f"N={N} outside the capacity range [0, {capacity}]")

    offset = float(sum(lv.seniority * lv.epsilon for lv in levels))
    G.setflags(write=False)
    return PairingModel(levels=levels, G=G, N=N, seniority_energy_offset=offset)


def coupling_from_rule(g: float, epsilons) -> np.ndarray:
    """Gap-weighted coupling matrix G_pq = (2.0 - 0.1 |eps_p - eps_q|) * g."""
    g = float(g)
    if not math.isfinite(g) or g < 0:
        raise ValueError(f"coupling strength g must be finite and >= 0, got {g}")
    eps = np.asarray(epsilons, dtype=float)
    if eps.ndim != 1 or not np.all(np.isfinite(eps)):
        raise ValueError("epsilons must be a finite 1-d sequence")
    return (2.0 - 0.1 * np.abs(eps[:, None] - eps[None, :])) * g


@dataclass(frozen=True, eq=False)
class QuasispinBasis:
    """Ordered enumeration of the fixed-N quasi-spin product states.

    Rows of `two_m` hold twice the projections (2 m_1 ... 2 m_k) in ascending
    lexicographic m order, which makes state indices reproducible. The pair
    count of level p in state i is (two_m[i, p] + two_j_eff[p]) / 2.
    """

    two_m: np.ndarray
    two_j_eff: np.ndarray
    N: int
    _index: dict = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.two_m.shape[0]

    @property
    def k(self) -> int:
        return self.two_m.shape[1]

    @property
    def m(self) -> np.ndarray:
        """Projections m_p as floats, shape (dimension, k)."""
        return self.two_m / 2.0

    @property
    def pair_counts(self) -> np.ndarray:
        """Pairs per level n_p = m_p + j_eff,p, shape (dimension, k), integer."""
        return (self.two_m + self.two_j_eff[None, :]) // 2

    def state_m(self, i: int) -> np.ndarray:
        """Projection vector of state i."""
        return self.two_m[i] / 2.0

    def position(self, two_m_tuple) -> int:
        """Index of the state with the given twice-projection tuple."""
        try:
            return self._index[tuple(two_m_tuple)]
        except KeyError:
            raise ValueError(f"state {two_m_tuple} not in basis") from None

    def index_of(self, m_values) -> int:
        """Index of the state with projections m_values (floats accepted)."""
        return self.position(tuple(_twice(m, "m") for m in m_values))


def _count_states(caps, N) -> int:
    """Number of compositions of N with level occupations 0 <= n_p <= caps[p].

    Exact integer dynamic program (per-level convolution of [1]*(cap+1)).
    """
    counts = [1] + [0] * N
    for cap in caps:
        new = [0] * (N + 1)
        for total in range(N + 1):
            lo = max(0, total - cap)
            new[total] = sum(counts[lo : total + 1])
        counts = new
    return counts[N]


def enumerate_basis(model: PairingModel, max_states: int = DEFAULT_STATE_CAP) -> QuasispinBasis:
    """Enumerate every N-pair product state of the model, lexicographic in m.

    The dimension is counted first and checked against `max_states` before
    any state is materialized.
    """
    caps = [lv.two_j_eff for lv in model.levels]
    k = len(caps)
    dim = _count_states(caps, model.N)
    if dim > max_states:
        raise ValueError(
            f"basis dimension {dim} exceeds the configured cap {max_states}"
        )

    suffix = [0] * (k + 1)
    for p in range(k - 1, -1, -1):
        suffix[p] = suffix[p + 1] + caps[p]

    states: list[tuple[int, ...]] = []

    def extend(p: int, remaining: int, prefix: tuple[int, ...]):
        if p == k - 1:
            states.append(prefix + (remaining,))
            return
        lo = max(0, remaining - suffix[p + 1])
        hi = min(caps[p], remaining)
        for n in range(lo, hi + 1):
            extend(p + 1, remaining - n, prefix + (n,))

    extend(0, model.N, ())
    assert len(states) == dim

    pair_counts = np.array(states, dtype=np.int64).reshape(dim, k)
    two_j_eff = model.two_j_eff
    two_m = 2 * pair_counts - two_j_eff[None, :]
    index = {tuple(row): i for i, row in enumerate(two_m.tolist())}
    two_m.setflags(write=False)
    return QuasispinBasis(two_m=two_m, two_j_eff=two_j_eff, N=model.N, _index=index)


def parse_model_config(config, *, g_override: float | None = None) -> PairingModel:
    """Build a model from the JSON configuration grammar.

    Expected keys: `levels` (list of {"j": ..., "epsilon": ..., "seniority": ...}),
    `N`, and `G` given either as an explicit k x k matrix or as the rule form
    {"rule": "paper", "g": <float>} selecting the built-in gap-weighted
    coupling. An optional `name` key is carried for humans and ignored here.
    `g_override` replaces the rule's g and is rejected for explicit-G configs.
    """
    if isinstance(config, str):
        config = json.loads(config)
    if not isinstance(config, dict):
        raise ValueError("model config must be a JSON object")

    allowed = {"levels", "N", "G", "name"}
    unknown = set(config) - allowed
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key in ("levels", "N", "G"):
        if key not in config:
            raise ValueError(f"config is missing required key '{key}'")

    raw_levels = config["levels"]
    if not isinstance(raw_levels, list) or not raw_levels:
        raise ValueError("'levels' must be a non-empty list")
    levels = []
    for entry in raw_levels:
        if not isinstance(entry, dict):
            raise ValueError("each level must be an object")
        extra = set(entry) - {"j", "epsilon", "seniority"}
        if extra:
            raise ValueError(f"unknown level keys: {sorted(extra)}")
        if "j" not in entry or "epsilon" not in entry:
            raise ValueError("each level needs 'j' and 'epsilon'")
        levels.append(
            LevelSpec(j=entry["j"], epsilon=entry["epsilon"], seniority=entry.get("seniority", 0))
        )

    raw_G = config["G"]
    if isinstance(raw_G, dict):
        extra = set(raw_G) - {"rule", "g"}
        if extra:
            raise ValueError(f"unknown G keys: {sorted(extra)}")
        if raw_G.get("rule") != "paper":
            raise ValueError(f"unknown coupling rule {raw_G.get('rule')!r}")
        g = g_override if g_override is not None else raw_G.get("g")
        if g is None:
            raise ValueError("rule-based G needs a coupling strength 'g'")
        G = coupling_from_rule(g, [lv.epsilon for lv in levels])
    else:
        if g_override is not None:
            raise ValueError("g override requires a rule-based G config")
        G = raw_G

    return build_model(levels, G, config["N"])


def load_model_config(path, *, g_override: float | None = None) -> PairingModel:
    """Read a JSON model config from disk."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_model_config(json.loads(text), g_override=g_override)
