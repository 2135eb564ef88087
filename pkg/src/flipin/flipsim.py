"""
Continuous-time periodic FlipIt with random phases, plus the
unknown-insider Monte-Carlo campaign.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import game
from .analysis import insider_play
from .equilibrium import (solve_bne, solve_ne_corrupt, solve_ne_inadvertent,
                          solve_ne_malicious)
from .errors import DomainError, InternalConsistencyError, NoEquilibriumError
from .game import GameParameters, InsiderType

DEFENDER = 0
ATTACKER = 1

# spawn-key tags keep the different random streams of one master seed apart
_RUN_STREAM = 1
_SCHEDULE_STREAM = 2
RSE_STREAM = 3

_UINT64 = (1 << 64) - 1


class Player(enum.IntEnum):
    DEFENDER = DEFENDER
    ATTACKER = ATTACKER


def derived_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for stream ``key`` of ``master_seed``."""
    ss = np.random.SeedSequence(int(master_seed) & _UINT64, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(None if seed is None else int(seed) & _UINT64)


# -- timeline -------------------------------------------------------------------

@dataclass(frozen=True)
class OwnershipTimeline:
    horizon: float
    event_times: np.ndarray      # sorted; ties ordered attacker before defender
    event_movers: np.ndarray     # DEFENDER / ATTACKER per event
    seg_starts: np.ndarray
    seg_ends: np.ndarray
    seg_owners: np.ndarray

    @property
    def defender_time(self) -> float:
        lengths = self.seg_ends - self.seg_starts
        return float(lengths[self.seg_owners == DEFENDER].sum())

    @property
    def defender_fraction(self) -> float:
        return self.defender_time / self.horizon

    def flip_count(self, player: int) -> int:
        return int(np.count_nonzero(self.event_movers == player))

    def owner_at(self, times) -> np.ndarray:
        """Owner at each time (the mover of the last flip at or before it)."""
        idx = np.searchsorted(self.event_times, np.asarray(times, dtype=float), side="right") - 1
        owners = np.where(idx >= 0, self.event_movers[np.clip(idx, 0, None)] if self.event_movers.size
                          else DEFENDER, DEFENDER)
        return owners.astype(np.int8)

    def segments(self) -> List[Tuple[float, float, Player]]:
        return [(float(s), float(e), Player(int(o)))
                for s, e, o in zip(self.seg_starts, self.seg_ends, self.seg_owners)]


def _flip_times(rate: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    if rate == 0:
        return np.empty(0)
    period = 1.0 / rate
    phase = rng.random() * period
    if not phase < horizon:     # also covers an infinite period from a subnormal rate
        return np.empty(0)
    n = int(np.ceil((horizon - phase) / period))
    times = phase + period * np.arange(max(n, 0))
    return times[times < horizon]


def simulate_flipit(alpha: float, beta: float, horizon: float, seed=None) -> OwnershipTimeline:
    """Periodic play with uniform random phases; the defender owns the resource at t=0."""
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    if alpha < 0 or beta < 0:
        raise DomainError("move rates must be non-negative")
    rng = _as_rng(seed)
    t_def = _flip_times(alpha, horizon, rng)
    t_att = _flip_times(beta, horizon, rng)

    times = np.concatenate([t_att, t_def])
    movers = np.concatenate([np.full(t_att.size, ATTACKER, np.int8), np.full(t_def.size, DEFENDER, np.int8)])
    # primary key time, secondary key mover: attacker (1) sorts before defender (0) on ties
    order = np.lexsort((-movers.astype(np.int16), times))
    times, movers = times[order], movers[order]

    # owner on [t_i, t_{i+1}) is the mover of flip i; collapse runs of equal owners
    owners = np.concatenate([[DEFENDER], movers]).astype(np.int8)
    starts = np.concatenate([[0.0], times])
    keep = np.concatenate([[True], owners[1:] != owners[:-1]])
    seg_starts = starts[keep]
    seg_owners = owners[keep]
    seg_ends = np.append(seg_starts[1:], horizon)
    nonempty = seg_ends > seg_starts
    return OwnershipTimeline(float(horizon), times, movers,
                             seg_starts[nonempty], seg_ends[nonempty], seg_owners[nonempty])


def mean_defender_fraction(alpha: float, beta: float, horizon: float, seeds: Sequence[int]) -> float:
    return float(np.mean([simulate_flipit(alpha, beta, horizon, s).defender_fraction for s in seeds]))


# -- insider sampling -------------------------------------------------------------

def sample_insider_type(params: GameParameters, rng: np.random.Generator) -> Tuple[InsiderType, float]:
    """Draw the insider's type from the beliefs and the fraction it affects.

    Malicious and corrupt insiders play their equilibrium gamma at the current
    sigma; an inadvertent one leaks a Uniform(0, gamma_max) fraction.
    """
    u = rng.random()
    if u < params.theta1:
        kind = InsiderType.MALICIOUS
    elif u < params.theta1 + params.theta_inadvertent:
        kind = InsiderType.INADVERTENT
    else:
        kind = InsiderType.CORRUPT
    if kind is InsiderType.INADVERTENT:
        gamma = 0.0
        while gamma == 0.0:
            gamma = rng.uniform(0.0, params.gamma_max)
    else:
        gamma = insider_play(params, kind, params.gamma_max)
    return kind, float(gamma)


# -- campaign ---------------------------------------------------------------------

class Strategy(enum.Enum):
    BAYESIAN = "bayesian"
    BASIC_MALICIOUS = "malicious"
    BASIC_INADVERTENT = "inadvertent"
    BASIC_CORRUPT = "corrupt"


@dataclass(frozen=True)
class CampaignConfig:
    params: GameParameters
    n_runs: int = 100
    strategy: Strategy = Strategy.BAYESIAN
    master_seed: int = 0

    def __post_init__(self):
        if self.n_runs < 1:
            raise DomainError("n_runs must be at least 1")


@dataclass(frozen=True)
class RunRecord:
    run: int
    insider_type: InsiderType
    gamma: float
    alpha: float
    beta: float
    benefit: float


@dataclass(frozen=True)
class CampaignResult:
    strategy: Strategy
    records: Tuple[RunRecord, ...]

    @property
    def benefits(self) -> np.ndarray:
        return np.array([r.benefit for r in self.records])

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.benefits)

    @property
    def total(self) -> float:
        return float(self.benefits.sum())


def strategy_tuple(params: GameParameters, strategy: Strategy, gamma: float = 0.0):
    """(alpha, beta) that defender and attacker play under ``strategy``."""
    try:
        if strategy is Strategy.BAYESIAN:
            result = solve_bne(params)
        elif strategy is Strategy.BASIC_MALICIOUS:
            result = solve_ne_malicious(params)
        elif strategy is Strategy.BASIC_CORRUPT:
            result = solve_ne_corrupt(params)
        else:
            result = solve_ne_inadvertent(params, gamma)
    except InternalConsistencyError as exc:
        raise NoEquilibriumError(f"{strategy.value} strategy is ambiguous: {exc}") from exc
    if result is None:
        raise NoEquilibriumError(
            f"{strategy.value} strategy has no closed-form equilibrium at sigma={params.sigma:.6g}")
    return result.profile.alpha, result.profile.beta


def run_campaign(config: CampaignConfig) -> CampaignResult:
    """Analytic defender benefit per run against a freshly drawn insider."""
    params = config.params
    fixed = None
    if config.strategy is not Strategy.BASIC_INADVERTENT:
        fixed = strategy_tuple(params, config.strategy)
    records = []
    for run in range(config.n_runs):
        rng = derived_rng(config.master_seed, _RUN_STREAM, run)
        kind, gamma = sample_insider_type(params, rng)
        alpha, beta = fixed if fixed is not None else strategy_tuple(params, config.strategy, gamma)
        benefit = float(game.defender_payoff(alpha, beta, gamma, params))
        records.append(RunRecord(run, kind, gamma, alpha, beta, benefit))
    return CampaignResult(config.strategy, tuple(records))


def run_campaigns(params: GameParameters, n_runs: int, master_seed: int,
                  strategies: Sequence[Strategy] = tuple(Strategy)) -> Dict[Strategy, CampaignResult]:
    """Every strategy faces the same insider draws (paired by run index)."""
    return {s: run_campaign(CampaignConfig(params, n_runs, s, master_seed)) for s in strategies}


# -- remote-estimation schedule -----------------------------------------------------

BLOCK_TYPES = (InsiderType.MALICIOUS, InsiderType.INADVERTENT, InsiderType.CORRUPT)
# the two types allowed for a randomised simulation in each block
_ALTERNATIVES = {
    0: (InsiderType.INADVERTENT, InsiderType.CORRUPT),
    1: (InsiderType.CORRUPT, InsiderType.MALICIOUS),
    2: (InsiderType.MALICIOUS, InsiderType.INADVERTENT),
}


@dataclass(frozen=True)
class ScheduledInsider:
    sim: int            # 1-based
    insider_type: InsiderType
    gamma: float

    @property
    def block(self) -> int:
        return (self.sim - 1) // 12

    @property
    def aligned(self) -> bool:
        return self.insider_type is BLOCK_TYPES[self.block]


def insider_schedule(experiment_index: int, master_seed: int,
                     params: GameParameters) -> List[ScheduledInsider]:
    """36 insider assignments whose alignment with the 12-sim blocks is 1/experiment_index."""
    if experiment_index not in (1, 2, 3, 4):
        raise DomainError(f"experiment index must be 1..4, got {experiment_index}")
    rng = derived_rng(master_seed, _SCHEDULE_STREAM, experiment_index)
    n_aligned = 12 // experiment_index
    out = []
    for block in range(3):
        for k in range(1, 13):
            if k <= n_aligned:
                kind = BLOCK_TYPES[block]
            else:
                kind = _ALTERNATIVES[block][int(rng.integers(2))]
            if kind is InsiderType.INADVERTENT:
                gamma = 0.0
                while gamma == 0.0:
                    gamma = rng.uniform(0.0, params.gamma_max)
            else:
                gamma = insider_play(params, kind, params.gamma_max)
            out.append(ScheduledInsider(block * 12 + k, kind, float(gamma)))
    return out


def alignment_ratio(schedule: Sequence[ScheduledInsider]) -> float:
    return sum(s.aligned for s in schedule) / len(schedule)
