"""Defender guidance over the attack-defense cost ratio sigma."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import game
from .equilibrium import (EquilibriumBenefit, bayesian_hypothesis_violations, bne_thresholds,
                          equilibrium_defender_benefit, fast_tuple, malicious_hypothesis_violations,
                          slow_tuple, solve_bne, solve_ne_corrupt, solve_ne_inadvertent,
                          solve_ne_malicious)
from .errors import DomainError, HypothesisViolation, NoEquilibriumError
from .game import GameParameters, InsiderType

INF = math.inf


# -- intervals -----------------------------------------------------------------

@dataclass(frozen=True)
class SigmaInterval:
    lower: float
    upper: float = INF
    lower_strict: bool = True
    upper_strict: bool = True

    @property
    def is_empty(self) -> bool:
        if self.lower < self.upper:
            return False
        return not (self.lower == self.upper and not self.lower_strict and not self.upper_strict)

    def __contains__(self, sigma: float) -> bool:
        if self.is_empty:
            return False
        above = sigma > self.lower if self.lower_strict else sigma >= self.lower
        below = sigma < self.upper if self.upper_strict else sigma <= self.upper
        return above and below

    def intersect(self, other: "SigmaInterval") -> "SigmaInterval":
        if self.lower > other.lower:
            lower, lstrict = self.lower, self.lower_strict
        elif other.lower > self.lower:
            lower, lstrict = other.lower, other.lower_strict
        else:
            lower, lstrict = self.lower, self.lower_strict or other.lower_strict
        if self.upper < other.upper:
            upper, ustrict = self.upper, self.upper_strict
        elif other.upper < self.upper:
            upper, ustrict = other.upper, other.upper_strict
        else:
            upper, ustrict = self.upper, self.upper_strict or other.upper_strict
        return SigmaInterval(lower, upper, lstrict, ustrict)

    def sample(self, n: int, rng: np.random.Generator, cap: float = 1e3) -> np.ndarray:
        """``n`` points strictly inside; unbounded intervals are cut at ``cap``."""
        hi = min(self.upper, max(cap, self.lower * 10 + 1))
        lo = self.lower
        return lo + (hi - lo) * rng.uniform(0.01, 0.99, size=n)

    def __str__(self):
        left = "(" if self.lower_strict else "["
        right = ")" if self.upper_strict or self.upper == INF else "]"
        return f"{left}{self.lower:.10g}, {'inf' if self.upper == INF else format(self.upper, '.10g')}{right}"


@dataclass(frozen=True)
class IntervalSet:
    """A finite union of disjoint sigma intervals."""

    pieces: tuple = ()

    @classmethod
    def of(cls, *intervals: SigmaInterval) -> "IntervalSet":
        return cls(tuple(iv for iv in intervals if not iv.is_empty))

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def __contains__(self, sigma: float) -> bool:
        return any(sigma in iv for iv in self.pieces)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet.of(*(a.intersect(b) for a in self.pieces for b in other.pieces))

    def __str__(self):
        return " U ".join(str(p) for p in self.pieces) if self.pieces else "{}"


def _upper_from_reciprocal(d: float) -> float:
    """Upper end of ``{sigma : 1/sigma > d}``."""
    return INF if d <= 0 else 1.0 / d


def _lower_from_reciprocal(d: float) -> Optional[float]:
    """Lower end of ``{sigma : 1/sigma < d}``; None if the set is empty."""
    return None if d <= 0 else 1.0 / d


@dataclass(frozen=True)
class AdvantageIntervals:
    t_m: IntervalSet
    t_i: IntervalSet
    t_c: IntervalSet
    intersection: IntervalSet
    form: str
    warnings: tuple = ()


def advantage_intervals(params: GameParameters, form: str = "reciprocal") -> AdvantageIntervals:
    """Sigma ranges where the Bayesian tuple beats each basic tuple.

    ``form="reciprocal"`` reads every ``sigma < 1/D`` bound as ``1/sigma > D``
    (unbounded when ``D <= 0``); ``form="literal"`` uses ``1/D`` as written,
    which empties the set for ``D <= 0``.
    """
    if form not in ("reciprocal", "literal"):
        raise DomainError(f"unknown interval form {form!r}")
    gm, ci = params.gamma_max, params.c_insider
    e, d = bne_thresholds(params)
    warnings = malicious_hypothesis_violations(params) + bayesian_hypothesis_violations(params)

    if form == "reciprocal":
        upper = _upper_from_reciprocal(d)
    else:
        upper = 1.0 / d if d != 0 else -INF

    m_slow = SigmaInterval(max(0.0, e / (1 - gm)), 1.0, True, False)
    m_fast_lower = _lower_from_reciprocal(2 * (1 - ci) * (1 - gm))
    m_fast = (SigmaInterval(m_fast_lower, upper) if m_fast_lower is not None
              else SigmaInterval(0.0, 0.0))
    t_m = IntervalSet.of(m_slow, m_fast)
    t_i = IntervalSet.of(SigmaInterval(1 / (1 - gm), upper))
    t_c = IntervalSet.of(SigmaInterval(1.0, upper))
    return AdvantageIntervals(t_m, t_i, t_c, t_m.intersect(t_i).intersect(t_c), form, warnings)


# -- strategy tuples and dominance ------------------------------------------------

def strategy_catalog(params: GameParameters, gamma: float) -> dict:
    """The four (alpha, beta) shapes any basic or Bayesian strategy can take."""
    if not 0 <= gamma < 1:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    return {
        "slow": slow_tuple(params, 0.0),
        "slow_scaled": slow_tuple(params, gamma),
        "fast": fast_tuple(params, 0.0),
        "fast_inflated": fast_tuple(params, gamma),
    }


def _u_d(pair, gamma0, params):
    return float(game.defender_payoff(pair[0], pair[1], gamma0, params))


@dataclass(frozen=True)
class DominanceReport:
    slow_scaled: float
    slow: float
    fast: float
    fast_inflated: float

    @property
    def slow_strict(self) -> bool:
        return self.slow_scaled > self.slow

    @property
    def fast_strict(self) -> bool:
        return self.fast > self.fast_inflated

    @property
    def slow_holds(self) -> bool:
        return self.slow_scaled >= self.slow

    @property
    def fast_holds(self) -> bool:
        return self.fast >= self.fast_inflated


def dominance_check(params: GameParameters, gamma: float, gamma0: float) -> DominanceReport:
    """Defender benefit of the four tuples against insider play ``gamma0``."""
    for name, value in (("gamma", gamma), ("gamma0", gamma0)):
        if not 0 <= value <= params.gamma_max:
            raise DomainError(f"{name}={value} outside [0, gamma_max]")
    cat = strategy_catalog(params, gamma)
    return DominanceReport(
        slow_scaled=_u_d(cat["slow_scaled"], gamma0, params),
        slow=_u_d(cat["slow"], gamma0, params),
        fast=_u_d(cat["fast"], gamma0, params),
        fast_inflated=_u_d(cat["fast_inflated"], gamma0, params),
    )


BASIC_KINDS = (InsiderType.MALICIOUS, InsiderType.INADVERTENT, InsiderType.CORRUPT)


def basic_tuple(params: GameParameters, kind: InsiderType, inadvertent_gamma: float):
    if kind is InsiderType.MALICIOUS:
        result = solve_ne_malicious(params)
    elif kind is InsiderType.CORRUPT:
        result = solve_ne_corrupt(params)
    else:
        result = solve_ne_inadvertent(params, inadvertent_gamma)
    if result is None:
        raise NoEquilibriumError(f"no {kind.value} equilibrium at sigma={params.sigma:.6g}")
    return result.profile


def insider_play(params: GameParameters, kind: InsiderType, inadvertent_gamma: float) -> float:
    """Gamma played by a basic insider of ``kind`` at the current sigma."""
    if kind is InsiderType.MALICIOUS:
        result = solve_ne_malicious(params)
        return params.gamma_max if result is None else result.profile.gamma
    if kind is InsiderType.CORRUPT:
        return params.gamma_max
    return inadvertent_gamma


@dataclass(frozen=True)
class Comparison:
    insider: InsiderType
    basic: InsiderType
    bayesian_value: float
    basic_value: float

    @property
    def bayesian_wins(self) -> bool:
        return self.bayesian_value > self.basic_value


def compare_strategies(params: GameParameters, inadvertent_gamma: Optional[float] = None,
                       rule: str = "printed") -> List[Comparison]:
    """All nine (insider play, basic tuple) comparisons against the Bayesian tuple."""
    leak = params.gamma_max if inadvertent_gamma is None else inadvertent_gamma
    bne = solve_bne(params, rule)
    if bne is None:
        raise NoEquilibriumError(f"no Bayesian equilibrium at sigma={params.sigma:.6g}")
    out = []
    for k1 in BASIC_KINDS:
        g0 = insider_play(params, k1, leak)
        bayes = _u_d((bne.profile.alpha, bne.profile.beta), g0, params)
        for k2 in BASIC_KINDS:
            prof = basic_tuple(params, k2, leak)
            out.append(Comparison(k1, k2, bayes, _u_d((prof.alpha, prof.beta), g0, params)))
    return out


# -- benefit curves and key points ---------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    sigma: float
    benefit: Optional[float]
    baseline: float
    branch: Optional[str] = None
    ambiguous: bool = False

    @property
    def defined(self) -> bool:
        return self.benefit is not None


def baseline_benefit(sigma: float) -> float:
    """Two-player FlipIt equilibrium value of the defender (no insider)."""
    return 0.0 if sigma <= 1 else 1.0 - 1.0 / sigma


def benefit_at(params: GameParameters, model: str, sigma: float,
               gamma: Optional[float] = None, rule: str = "printed") -> EquilibriumBenefit:
    return equilibrium_defender_benefit(params.with_sigma(sigma), model, gamma=gamma, rule=rule)


def benefit_curve(params: GameParameters, model: str, sigma_grid: Sequence[float],
                  gamma: Optional[float] = None, rule: str = "printed") -> List[CurvePoint]:
    """Equilibrium defender benefit along ``sigma_grid`` (C_A fixed, C_D = C_A/sigma)."""
    grid = np.asarray(list(sigma_grid), dtype=float)
    if grid.size == 0:
        raise DomainError("sigma grid is empty")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("sigma grid must be positive and strictly increasing")
    out = []
    for s in grid:
        res = benefit_at(params, model, float(s), gamma, rule)
        out.append(CurvePoint(float(s), res.value, baseline_benefit(float(s)),
                              res.branch.value if res.branch else None, bool(res.ambiguous)))
    return out


@dataclass(frozen=True)
class KeyPoints:
    A: tuple
    B: tuple
    C: tuple


def _first_threshold(params: GameParameters, model: str) -> float:
    """Denominator d of the fast-gamma0 supremum sigma = 1/d."""
    if model == "malicious":
        return 2 * (1 - params.c_insider)
    return bne_thresholds(params)[1]


def _require_guidance_hypothesis(params: GameParameters, model: str):
    if model == "malicious":
        bad = malicious_hypothesis_violations(params)
    elif model == "bayesian":
        bad = bayesian_hypothesis_violations(params)
    else:
        raise DomainError(f"key points are defined for 'malicious' and 'bayesian', not {model!r}")
    if bad:
        raise HypothesisViolation("; ".join(bad))


def key_points(params: GameParameters, model: str, sigma_max: float) -> KeyPoints:
    """Points A (end of the first rising piece), B (start of the second) and C (sigma_max)."""
    _require_guidance_hypothesis(params, model)
    gm = params.gamma_max
    d = _first_threshold(params, model)
    a = (1 / d, 1 - d)
    b = (1 / ((1 - gm) * d), (1 - gm) * (1 - d))
    c_val = benefit_at(params, model, sigma_max).value
    return KeyPoints(A=a, B=b, C=(sigma_max, c_val))


def _inside_below(threshold: float, ok) -> float:
    """Largest float below ``threshold`` (within a few ulps) that satisfies ``ok``."""
    s = threshold
    for _ in range(64):
        s = math.nextafter(s, 0.0)
        if ok(s):
            return s
    raise DomainError(f"no admissible sigma just below {threshold}")


def recommend_sigma(params: GameParameters, model: str, sigma_max: float,
                    gamma: Optional[float] = None):
    """(sigma, rationale tag) maximising the defender's equilibrium benefit up to ``sigma_max``."""
    if model in ("inadvertent", "corrupt"):
        return sigma_max, "increasing-benefit: use sigma_max"
    pts = key_points(params, model, sigma_max)
    a_sigma = pts.A[0]
    if sigma_max <= a_sigma:
        return sigma_max, "sigma-max-before-A: use sigma_max"
    c_val = pts.C[1]
    if c_val is not None and c_val > pts.B[1]:
        return sigma_max, "point-B-below-C: use sigma_max"
    sigma = _inside_below(a_sigma, lambda s: benefit_at(params, model, s).defined)
    return sigma, "point-C-below-B: use interior threshold"


def gdt_witness(params: GameParameters, model: str, offset: float = 0.05, max_halvings: int = 40):
    """Pair sigma1 < sigma2 whose equilibrium benefits decrease: U(sigma1) > U(sigma2).

    sigma1 sits below the supremum of the first rising branch and sigma2 above
    the infimum of the second; the relative offset starts at ``offset`` and is
    halved until the ordering holds.
    """
    _require_guidance_hypothesis(params, model)
    gm = params.gamma_max
    d = _first_threshold(params, model)
    first_sup = 1 / d
    second_inf = 1 / ((1 - gm) * d)
    eps = offset
    for _ in range(max_halvings):
        s1 = first_sup * (1 - eps)
        if s1 <= 1:
            s1 = first_sup - eps * (first_sup - 1)
        s2 = second_inf * (1 + eps)
        b1 = benefit_at(params, model, s1)
        b2 = benefit_at(params, model, s2)
        if b1.defined and b2.defined and b1.value > b2.value:
            return (s1, s2), (b1.value, b2.value)
        eps /= 2
    raise DomainError("no decreasing pair found near the branch thresholds")
