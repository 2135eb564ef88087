"""
Core model of the FlipIt-insider game.

Three players share one resource: a defender and an attacker flip it
periodically at rates ``alpha`` and ``beta``; an insider diverts a fraction
``gamma`` of whatever the defender controls.  The insider is Malicious,
Inadvertent or Corrupt with probabilities ``theta1``, ``1 - theta1 - theta2``
and ``theta2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import MISSING, asdict, dataclass, fields, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ConfigError, DomainError


class InsiderType(enum.Enum):
    MALICIOUS = "malicious"
    INADVERTENT = "inadvertent"
    CORRUPT = "corrupt"


@dataclass(frozen=True)
class GameParameters:
    """Costs, beliefs and strategy bounds of one game instance."""

    c_defender: float
    c_attacker: float
    c_insider: float
    c_attacker_to_insider: float
    theta1: float
    theta2: float
    gamma_max: float
    alpha_max: float = 10.0
    beta_max: float = 10.0

    def __post_init__(self):
        for name in ("c_defender", "c_attacker", "c_insider", "c_attacker_to_insider",
                     "alpha_max", "beta_max"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
        if self.c_attacker_to_insider <= self.c_insider:
            raise DomainError("c_attacker_to_insider must exceed c_insider")
        if not (0 <= self.theta1 <= 1 and 0 <= self.theta2 <= 1):
            raise DomainError("theta1 and theta2 must lie in [0, 1]")
        if self.theta1 + self.theta2 > 1 + 1e-12:
            raise DomainError("theta1 + theta2 must not exceed 1")
        if not 0 < self.gamma_max < 1:
            raise DomainError("gamma_max must lie strictly between 0 and 1")

    @property
    def sigma(self) -> float:
        """Attack-defense cost ratio C_A / C_D."""
        return adcr(self)

    @property
    def theta(self) -> float:
        """Belief ratio theta1 / theta2; undefined when theta2 is zero."""
        if self.theta2 <= 0:
            raise DomainError("theta = theta1/theta2 is undefined for theta2 = 0")
        return self.theta1 / self.theta2

    @property
    def theta_inadvertent(self) -> float:
        return max(0.0, 1.0 - self.theta1 - self.theta2)

    def with_sigma(self, sigma: float) -> "GameParameters":
        """Same instance with C_D moved so that C_A / C_D equals ``sigma``."""
        if not sigma > 0:
            raise DomainError("sigma must be positive")
        return replace(self, c_defender=self.c_attacker / sigma)

    def with_beliefs(self, theta1: float, theta2: float) -> "GameParameters":
        return replace(self, theta1=theta1, theta2=theta2)

    def to_mapping(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> "GameParameters":
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown parameter key(s): {', '.join(sorted(unknown))}")
        required = [f.name for f in fields(cls) if f.default is MISSING]
        missing = [name for name in required if name not in data]
        if missing:
            raise ConfigError(f"missing parameter key(s): {', '.join(missing)}")
        values = {}
        for key, raw in data.items():
            try:
                values[key] = float(raw)
            except (TypeError, ValueError):
                raise ConfigError(f"parameter {key!r} is not a number: {raw!r}") from None
        return cls(**values)

    def dumps(self) -> str:
        return "".join(f"{k} = {v!r}\n" for k, v in self.to_mapping().items())

    @classmethod
    def loads(cls, text: str) -> "GameParameters":
        return cls.from_mapping(parse_key_values(text))

    @classmethod
    def load(cls, path) -> "GameParameters":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.loads(text)


def parse_key_values(text: str) -> dict:
    """Parse ``key = value`` (or ``key: value``) lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = (part.strip() for part in line.split(sep, 1))
                break
        else:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass(frozen=True)
class StrategyProfile:
    alpha: float
    beta: float
    gamma: float

    def validate(self, params: GameParameters) -> "StrategyProfile":
        if not 0 <= self.alpha <= params.alpha_max:
            raise DomainError(f"alpha={self.alpha} outside [0, {params.alpha_max}]")
        if not 0 <= self.beta <= params.beta_max:
            raise DomainError(f"beta={self.beta} outside [0, {params.beta_max}]")
        if not 0 <= self.gamma <= params.gamma_max:
            raise DomainError(f"gamma={self.gamma} outside [0, {params.gamma_max}]")
        return self

    @property
    def defender_period(self) -> float:
        if self.alpha <= 0:
            raise DomainError("defender period undefined for alpha = 0")
        return 1.0 / self.alpha

    @property
    def attacker_period(self) -> float:
        if self.beta <= 0:
            raise DomainError("attacker period undefined for beta = 0")
        return 1.0 / self.beta

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)


def adcr(params: GameParameters) -> float:
    if not params.c_defender > 0:
        raise DomainError("c_defender must be positive")
    return params.c_attacker / params.c_defender


def control_fraction(alpha, beta):
    """
    Long-run fraction of time the defender owns the resource.

    Works elementwise on arrays.  ``beta == 0`` gives 1 (the defender keeps its
    initial ownership); ``alpha == 0 < beta`` gives 0.
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if np.any(a < 0) or np.any(b < 0) or np.any(np.isnan(a)) or np.any(np.isnan(b)):
        raise DomainError("move rates must be non-negative")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        slow = a / (2.0 * b)
        fast = 1.0 - b / (2.0 * a)
    x = np.where(a <= b, slow, fast)
    x = np.where(b == 0, 1.0, x)
    x = np.where((a == 0) & (b > 0), 0.0, x)
    if x.ndim == 0:
        return float(x)
    return x


# Elementwise payoff kernels; the profile-based functions below wrap them.

def defender_payoff(alpha, beta, gamma, params: GameParameters):
    x = control_fraction(alpha, beta)
    return x * (1.0 - np.asarray(gamma, dtype=float)) - params.c_defender * np.asarray(alpha, dtype=float)


def attacker_payoff(alpha, beta, gamma, params: GameParameters, insider_type: InsiderType):
    x = control_fraction(alpha, beta)
    value = 1.0 - x - params.c_attacker * np.asarray(beta, dtype=float)
    if insider_type is InsiderType.CORRUPT:
        value = value - params.c_attacker_to_insider * np.asarray(gamma, dtype=float)
    return value


def insider_payoff(alpha, beta, gamma, params: GameParameters, insider_type: InsiderType):
    gamma = np.asarray(gamma, dtype=float)
    if insider_type is InsiderType.MALICIOUS:
        return gamma * (control_fraction(alpha, beta) - params.c_insider)
    if insider_type is InsiderType.CORRUPT:
        shape = np.broadcast(np.asarray(alpha), np.asarray(beta), gamma).shape
        return np.broadcast_to(gamma * (params.c_attacker_to_insider - params.c_insider), shape) * 1.0
    shape = np.broadcast(np.asarray(alpha), np.asarray(beta), gamma).shape
    return np.zeros(shape)


def expected_payoffs(alpha, beta, gamma, params: GameParameters):
    x = control_fraction(alpha, beta)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    u_d = x - params.c_defender * alpha - x * gamma
    u_a = 1.0 - x - params.c_attacker * beta - params.theta2 * params.c_attacker_to_insider * gamma
    u_i = (params.theta1 * gamma * (x - params.c_insider)
           + params.theta2 * gamma * (params.c_attacker_to_insider - params.c_insider))
    return u_d, u_a, u_i


def defender_benefit(profile: StrategyProfile, params: GameParameters) -> float:
    profile.validate(params)
    return float(defender_payoff(profile.alpha, profile.beta, profile.gamma, params))


def attacker_benefit(profile: StrategyProfile, params: GameParameters,
                     insider_type: InsiderType) -> float:
    profile.validate(params)
    return float(attacker_payoff(profile.alpha, profile.beta, profile.gamma, params, insider_type))


def insider_benefit(profile: StrategyProfile, params: GameParameters,
                    insider_type: InsiderType) -> float:
    profile.validate(params)
    return float(insider_payoff(profile.alpha, profile.beta, profile.gamma, params, insider_type))


def expected_benefits(profile: StrategyProfile, params: GameParameters):
    """Belief-weighted benefits (defender, attacker, insider)."""
    profile.validate(params)
    return tuple(float(v) for v in expected_payoffs(profile.alpha, profile.beta, profile.gamma, params))
