"""
Remote state estimation of a scalar LTI plant whose cloud estimator is
contested by a defender and an attacker, with an insider on the defender side.

The smart sensor runs a local Kalman filter and transmits the innovation
z_k = y_k - c*a*xhat_{k-1}; the remote estimator integrates whatever
innovation reaches it.  Whoever corrupts the channel replaces z_k by -z_k.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .equilibrium import solve_bne, solve_ne_corrupt, solve_ne_inadvertent, solve_ne_malicious
from .errors import DomainError, InternalConsistencyError, NoEquilibriumError
from .flipsim import (ATTACKER, DEFENDER, RSE_STREAM, ScheduledInsider,
                      insider_schedule, simulate_flipit)
from .game import GameParameters, InsiderType


@dataclass(frozen=True)
class LtiSystem:
    a: float = 0.8
    c: float = 1.2
    q: float = 1.0
    r: float = 1.0
    x0_mean: float = 0.0
    x0_var: float = 1.0

    def __post_init__(self):
        if self.q < 0 or self.r <= 0 or self.x0_var < 0:
            raise DomainError("noise variances must be non-negative (r positive)")
        if self.c == 0:
            raise DomainError("observation coefficient c must be non-zero")
        if abs(self.a) >= 1:
            warnings.warn(f"plant is not asymptotically stable (|a|={abs(self.a)})", RuntimeWarning)


def rse_parameters() -> GameParameters:
    """Game parameters of the remote-estimation experiments."""
    return GameParameters(c_defender=0.2, c_attacker=1.0, c_insider=0.51,
                          c_attacker_to_insider=1.01, theta1=0.33, theta2=0.33, gamma_max=0.75)


@dataclass(frozen=True)
class RseConfig:
    system: LtiSystem = field(default_factory=LtiSystem)
    params: GameParameters = field(default_factory=rse_parameters)
    horizon: float = 100.0
    dt: float = 0.1
    experiment_index: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if not (self.horizon > 0 and self.dt > 0):
            raise DomainError("horizon and dt must be positive")
        ratio = self.horizon / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise DomainError("horizon / dt must be a positive integer")
        if self.experiment_index not in (1, 2, 3, 4):
            raise DomainError(f"experiment index must be 1..4, got {self.experiment_index}")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


# -- filtering --------------------------------------------------------------------

def kalman_step(state: Tuple[float, float], system: LtiSystem, innovation: float):
    """One predict/update step driven by a supplied (possibly tampered) innovation.

    Returns (estimate, variance, gain).
    """
    estimate, variance = state
    if variance < 0:
        raise DomainError("variance must be non-negative")
    prior = system.a * system.a * variance + system.q
    gain = prior * system.c / (system.c * system.c * prior + system.r)
    return (system.a * estimate + gain * innovation,
            (1.0 - gain * system.c) * prior,
            gain)


def riccati_fixed_point(system: LtiSystem):
    """Steady-state (prior variance, gain, posterior variance) in closed form."""
    a2, c2, q, r = system.a ** 2, system.c ** 2, system.q, system.r
    # positive root of c2 P^2 + (r - a2 r - q c2) P - q r = 0
    b = r - a2 * r - q * c2
    prior = (-b + math.sqrt(b * b + 4.0 * c2 * q * r)) / (2.0 * c2)
    gain = prior * system.c / (c2 * prior + r)
    return prior, gain, prior * r / (c2 * prior + r)


def corrupt_innovation(z: float, owner, insider_active: bool) -> float:
    if owner == ATTACKER or insider_active:
        return -z
    return z


# -- one run ------------------------------------------------------------------------

@dataclass(frozen=True)
class RseRunResult:
    u_d: float
    rmse: float
    t_d_fraction: float
    insider_type: Optional[InsiderType]
    gamma_used: float
    alpha: float
    beta: float
    innovations: Optional[np.ndarray] = field(default=None, repr=False, compare=False)


def simulate_rse_run(config: RseConfig, strategy_tuple: Tuple[float, float],
                     insider: Tuple[Optional[InsiderType], float], seed,
                     keep_innovations: bool = False) -> RseRunResult:
    alpha, beta = strategy_tuple
    kind, gamma = insider
    if not 0 <= gamma <= 1:
        raise DomainError("insider gamma must lie in [0, 1]")
    system, n = config.system, config.n_steps
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    flip_ss, noise_ss, insider_ss = ss.spawn(3)

    timeline = simulate_flipit(alpha, beta, config.horizon, flip_ss)
    owners = timeline.owner_at(config.dt * np.arange(1, n + 1))

    noise = np.random.default_rng(noise_ss)
    x = noise.normal(system.x0_mean, math.sqrt(system.x0_var))
    w = noise.normal(0.0, math.sqrt(system.q), n)
    v = noise.normal(0.0, math.sqrt(system.r), n)
    active = (np.random.default_rng(insider_ss).random(n) < gamma) & (owners == DEFENDER)

    local = (system.x0_mean, system.x0_var)
    remote = (system.x0_mean, system.x0_var)
    sq_err = 0.0
    innovations = np.empty(n) if keep_innovations else None
    for k in range(n):
        x = system.a * x + w[k]
        y = system.c * x + v[k]
        z = y - system.c * system.a * local[0]
        local = kalman_step(local, system, z)[:2]
        remote = kalman_step(remote, system, corrupt_innovation(z, owners[k], bool(active[k])))[:2]
        sq_err += (x - remote[0]) ** 2
        if innovations is not None:
            innovations[k] = z

    frac = timeline.defender_fraction
    u_d = frac * (1.0 - gamma) - config.params.c_defender * alpha
    return RseRunResult(u_d, math.sqrt(sq_err / n), frac, kind, float(gamma),
                        float(alpha), float(beta), innovations)


# -- experiments ----------------------------------------------------------------------

STRATEGY_KINDS = ("bayesian", "basic")


def _resolve(result, what):
    if result is None:
        raise NoEquilibriumError(f"no closed-form {what} equilibrium at these parameters")
    return result.profile.alpha, result.profile.beta


def sim_tuple(params: GameParameters, kind: str, entry: ScheduledInsider):
    """(alpha, beta) played in one simulation of the schedule."""
    try:
        if kind == "bayesian":
            return _resolve(solve_bne(params), "Bayesian")
        if kind != "basic":
            raise DomainError(f"strategy kind must be one of {STRATEGY_KINDS}")
        if entry.block == 0:
            return _resolve(solve_ne_malicious(params), "malicious")
        if entry.block == 1:
            # the defender identifies the sim's leak fraction
            return _resolve(solve_ne_inadvertent(params, entry.gamma), "inadvertent")
        return _resolve(solve_ne_corrupt(params), "corrupt")
    except InternalConsistencyError as exc:
        raise NoEquilibriumError(str(exc)) from exc


@dataclass(frozen=True)
class RseExperimentResult:
    strategy: str
    experiment_index: int
    schedule: Tuple[ScheduledInsider, ...]
    runs: Tuple[RseRunResult, ...]

    @property
    def u_d(self) -> np.ndarray:
        return np.array([r.u_d for r in self.runs])

    @property
    def rmse(self) -> np.ndarray:
        return np.array([r.rmse for r in self.runs])

    @property
    def cum_u_d(self) -> np.ndarray:
        return np.cumsum(self.u_d)

    @property
    def cum_rmse(self) -> np.ndarray:
        return np.cumsum(self.rmse)

    @property
    def total_u_d(self) -> float:
        return float(self.u_d.sum())

    @property
    def total_rmse(self) -> float:
        return float(self.rmse.sum())


def sim_seed(master_seed: int, experiment_index: int, sim: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master_seed) & ((1 << 64) - 1),
                                  spawn_key=(RSE_STREAM, experiment_index, sim))


def run_rse_experiment(config: RseConfig, strategy_kind: str) -> RseExperimentResult:
    """36 simulations; both strategy kinds see the same per-sim seeds and insiders."""
    if strategy_kind not in STRATEGY_KINDS:
        raise DomainError(f"strategy kind must be one of {STRATEGY_KINDS}")
    schedule = insider_schedule(config.experiment_index, config.master_seed, config.params)
    runs = []
    for entry in schedule:
        pair = sim_tuple(config.params, strategy_kind, entry)
        seed = sim_seed(config.master_seed, config.experiment_index, entry.sim)
        runs.append(simulate_rse_run(config, pair, (entry.insider_type, entry.gamma), seed))
    return RseExperimentResult(strategy_kind, config.experiment_index, tuple(schedule), tuple(runs))


def lag1_autocorrelation(series: Sequence[float]) -> float:
    s = np.asarray(series, dtype=float)
    s = s - s.mean()
    denom = float(s @ s)
    return float(s[1:] @ s[:-1]) / denom if denom > 0 else 0.0
