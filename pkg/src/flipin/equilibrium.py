"""
Closed-form equilibria of the FlipIt-insider game and a brute-force checker.

Every equilibrium has one of four (alpha, beta) shapes, selected by the move
regime (slow: alpha <= beta, fast: alpha > beta) and by whether the insider
plays 0 or its bound.  The solvers below only decide *which* shape applies.

Two selection rules exist for the Bayesian game:

``"printed"``
    The published branch inequalities in terms of sigma and
    theta = theta1/theta2, with every ``sigma < 1/D`` bound evaluated as
    ``1/sigma > D``.
``"sign"``
    The sign analysis the inequalities are derived from: a candidate is kept
    iff its regime inequality holds and the insider's marginal value H has the
    sign that makes its gamma a best response.

The two rules disagree on parts of parameter space; `verify_equilibrium`
arbitrates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import game
from .errors import (DomainError, EdgeCaseRoutingError, HypothesisViolation,
                     InternalConsistencyError)
from .game import GameParameters, InsiderType, StrategyProfile


class Regime(enum.Enum):
    SLOW = "slow"   # alpha <= beta
    FAST = "fast"   # alpha > beta


class EquilibriumBranch(enum.Enum):
    BNE_SLOW_GAMMA_ZERO = "bne-slow-gamma0"
    BNE_SLOW_GAMMA_MAX = "bne-slow-gammamax"
    BNE_FAST_GAMMA_ZERO = "bne-fast-gamma0"
    BNE_FAST_GAMMA_MAX = "bne-fast-gammamax"
    NE_MALICIOUS_1 = "ne-malicious-slow-gamma0"
    NE_MALICIOUS_2 = "ne-malicious-slow-gammamax"
    NE_MALICIOUS_3 = "ne-malicious-fast-gamma0"
    NE_MALICIOUS_4 = "ne-malicious-fast-gammamax"
    NE_INADVERTENT_SLOW = "ne-inadvertent-slow"
    NE_INADVERTENT_FAST = "ne-inadvertent-fast"
    NE_CORRUPT_SLOW = "ne-corrupt-slow"
    NE_CORRUPT_FAST = "ne-corrupt-fast"

    @property
    def regime(self) -> Regime:
        return Regime.FAST if "fast" in self.value else Regime.SLOW


_B = EquilibriumBranch
_BNE_BRANCHES = (_B.BNE_SLOW_GAMMA_ZERO, _B.BNE_SLOW_GAMMA_MAX,
                 _B.BNE_FAST_GAMMA_ZERO, _B.BNE_FAST_GAMMA_MAX)


@dataclass(frozen=True)
class EquilibriumResult:
    profile: StrategyProfile
    branch: EquilibriumBranch
    sigma: float
    conditions: tuple = field(default_factory=tuple)

    @property
    def regime(self) -> Regime:
        return self.branch.regime

    def to_record(self) -> dict:
        return {
            "alpha": self.profile.alpha,
            "beta": self.profile.beta,
            "gamma": self.profile.gamma,
            "branch": self.branch.value,
            "sigma": self.sigma,
            "regime": self.regime.value,
            "conditions": [{"id": cid, "satisfied": bool(ok)} for cid, ok in self.conditions],
        }


@dataclass(frozen=True)
class AuxiliaryQuantities:
    """Marginal values whose signs pin down best responses.

    ``F`` is the defender's per-unit-alpha value in the slow regime, ``K`` the
    attacker's per-unit-beta value in the fast regime and ``H`` the insider's
    per-unit-gamma expected value.  ``F``/``K`` are None where undefined.
    """

    F: Optional[float]
    H: float
    K: Optional[float]


def auxiliary_quantities(profile: StrategyProfile, params: GameParameters) -> AuxiliaryQuantities:
    x = game.control_fraction(profile.alpha, profile.beta)
    F = (1 - profile.gamma) / (2 * profile.beta) - params.c_defender if profile.beta > 0 else None
    K = 1 / (2 * profile.alpha) - params.c_attacker if profile.alpha > 0 else None
    return AuxiliaryQuantities(F=F, H=insider_marginal(x, params), K=K)


def insider_marginal(x: float, params: GameParameters) -> float:
    return (params.theta1 * (x - params.c_insider)
            + params.theta2 * (params.c_attacker_to_insider - params.c_insider))


# -- the four strategy shapes ---------------------------------------------------

def slow_tuple(params: GameParameters, gamma: float = 0.0):
    """(alpha, beta) when the defender is indifferent: beta = (1-gamma)/(2 C_D)."""
    ca, cd = params.c_attacker, params.c_defender
    return ca * (1 - gamma) ** 2 / (2 * cd ** 2), (1 - gamma) / (2 * cd)


def fast_tuple(params: GameParameters, gamma: float = 0.0):
    """(alpha, beta) when the attacker is indifferent: alpha = 1/(2 C_A)."""
    ca, cd = params.c_attacker, params.c_defender
    return 1 / (2 * ca), cd / (2 * (1 - gamma) * ca ** 2)


def _profile_for(branch: EquilibriumBranch, params: GameParameters, gamma: float) -> StrategyProfile:
    if branch.regime is Regime.SLOW:
        alpha, beta = slow_tuple(params, gamma)
    else:
        alpha, beta = fast_tuple(params, gamma)
    return StrategyProfile(alpha, beta, gamma)


def _branch_gamma(branch: EquilibriumBranch, params: GameParameters) -> float:
    return 0.0 if branch.value.endswith("gamma0") else params.gamma_max


def _check_bounds(profile: StrategyProfile, params: GameParameters) -> StrategyProfile:
    if profile.alpha > params.alpha_max or profile.beta > params.beta_max:
        raise DomainError(
            f"equilibrium rates ({profile.alpha:.6g}, {profile.beta:.6g}) exceed the strategy "
            f"bounds ({params.alpha_max}, {params.beta_max}); raise alpha_max/beta_max")
    return profile


def _require_bne_hypothesis(params: GameParameters):
    t1, t2 = params.theta1, params.theta2
    if t1 == 1:
        raise EdgeCaseRoutingError("theta1 = 1: the insider is certainly malicious; "
                                   "use solve_ne_malicious", "malicious")
    if t2 == 1:
        raise EdgeCaseRoutingError("theta2 = 1: the insider is certainly corrupt; "
                                   "use solve_ne_corrupt", "corrupt")
    if t1 == 0 and t2 == 0:
        raise EdgeCaseRoutingError("theta1 = theta2 = 0: the insider is certainly inadvertent; "
                                   "use solve_ne_inadvertent", "inadvertent")
    if t1 == 0 or t2 == 0 or t1 + t2 >= 1:
        raise EdgeCaseRoutingError(
            "the Bayesian closed form needs theta1 > 0, theta2 > 0 and theta1 + theta2 < 1; "
            "only two insider types remain, use an edge-case solver", "edge")


# -- Bayesian conditions ----------------------------------------------------------

def bne_thresholds(params: GameParameters):
    """The two threshold expressions of the printed conditions.

    Returns ``(E, D)`` with ``E = (2θ+2)C_I - 2θC_AI`` (slow-regime bound) and
    ``D = (2θ-2)C_I - 2θC_AI + 2`` (fast-regime reciprocal bound).
    """
    theta = params.theta
    ci, cai = params.c_insider, params.c_attacker_to_insider
    return (2 * theta + 2) * ci - 2 * theta * cai, (2 * theta - 2) * ci - 2 * theta * cai + 2


def printed_bne_conditions(params: GameParameters):
    """[(branch, satisfied)] for the published inequalities, reciprocal form."""
    sigma = params.sigma
    gm = params.gamma_max
    e, d = bne_thresholds(params)
    return [
        (_B.BNE_SLOW_GAMMA_ZERO, sigma <= 1 and sigma < e),
        (_B.BNE_SLOW_GAMMA_MAX, e / (1 - gm) < sigma <= 1 / (1 - gm)),
        (_B.BNE_FAST_GAMMA_ZERO, sigma > 1 and 1 / sigma > d),
        (_B.BNE_FAST_GAMMA_MAX, sigma > 1 / (1 - gm) and 1 / sigma < (1 - gm) * d),
    ]


def sign_bne_conditions(params: GameParameters):
    """[(branch, satisfied)] from the regime inequality and the sign of H at each candidate."""
    out = []
    for branch in _BNE_BRANCHES:
        gamma = _branch_gamma(branch, params)
        profile = _profile_for(branch, params, gamma)
        if branch.regime is Regime.SLOW:
            regime_ok = profile.alpha <= profile.beta
        else:
            regime_ok = profile.alpha > profile.beta
        h = insider_marginal(game.control_fraction(profile.alpha, profile.beta), params)
        sign_ok = h < 0 if gamma == 0 else h > 0
        out.append((branch, bool(regime_ok and sign_ok)))
    return out


def bne_conditions(params: GameParameters, rule: str = "printed"):
    _require_bne_hypothesis(params)
    if rule == "printed":
        return printed_bne_conditions(params)
    if rule == "sign":
        return sign_bne_conditions(params)
    raise DomainError(f"unknown condition rule {rule!r}; expected 'printed' or 'sign'")


def _audit(branch, params, profile, conditions):
    """Condition flags plus regime and H-sign checks on the chosen profile."""
    h = insider_marginal(game.control_fraction(profile.alpha, profile.beta), params)
    regime_ok = (profile.alpha <= profile.beta) if branch.regime is Regime.SLOW else (profile.alpha > profile.beta)
    sign_ok = h < 0 if profile.gamma == 0 else h > 0
    return tuple((b.value, ok) for b, ok in conditions) + (("regime", regime_ok), ("h-sign", sign_ok))


def _pick(conditions, what):
    chosen = [branch for branch, ok in conditions if ok]
    if len(chosen) > 1:
        raise InternalConsistencyError(
            f"{what}: several branch conditions hold at once ({', '.join(b.value for b in chosen)})",
            chosen)
    return chosen[0] if chosen else None


def solve_bne(params: GameParameters, rule: str = "printed") -> Optional[EquilibriumResult]:
    """Closed-form Bayesian Nash equilibrium, or None when no branch condition holds."""
    conditions = bne_conditions(params, rule)
    branch = _pick(conditions, "solve_bne")
    if branch is None:
        return None
    profile = _check_bounds(_profile_for(branch, params, _branch_gamma(branch, params)), params)
    return EquilibriumResult(profile, branch, params.sigma, _audit(branch, params, profile, conditions))


# -- edge cases -----------------------------------------------------------------

def malicious_conditions(params: GameParameters):
    sigma, gm, ci = params.sigma, params.gamma_max, params.c_insider
    return [
        (_B.NE_MALICIOUS_1, sigma <= 1 and sigma < 2 * ci),
        (_B.NE_MALICIOUS_2, 2 * ci / (1 - gm) < sigma <= 1 / (1 - gm)),
        (_B.NE_MALICIOUS_3, sigma > 1 and 1 / sigma > 2 * (1 - ci)),
        (_B.NE_MALICIOUS_4, sigma > 1 / (1 - gm) and 1 / sigma < 2 * (1 - ci) * (1 - gm)),
    ]


def solve_ne_malicious(params: GameParameters) -> Optional[EquilibriumResult]:
    """Nash equilibrium when the insider is known to be malicious."""
    conditions = malicious_conditions(params)
    branch = _pick(conditions, "solve_ne_malicious")
    if branch is None:
        return None
    gamma = 0.0 if branch in (_B.NE_MALICIOUS_1, _B.NE_MALICIOUS_3) else params.gamma_max
    profile = _check_bounds(_profile_for(branch, params, gamma), params)
    return EquilibriumResult(profile, branch, params.sigma, tuple((b.value, ok) for b, ok in conditions))


def solve_ne_inadvertent(params: GameParameters, gamma: float) -> EquilibriumResult:
    """Nash equilibrium against an inadvertent insider leaking a known fraction ``gamma``."""
    if not 0 <= gamma < 1:
        raise DomainError(f"inadvertent leak fraction must lie in [0, 1), got {gamma}")
    sigma = params.sigma
    slow = sigma <= 1 / (1 - gamma)
    branch = _B.NE_INADVERTENT_SLOW if slow else _B.NE_INADVERTENT_FAST
    profile = _check_bounds(_profile_for(branch, params, gamma), params)
    conditions = ((_B.NE_INADVERTENT_SLOW.value, slow), (_B.NE_INADVERTENT_FAST.value, not slow))
    return EquilibriumResult(profile, branch, sigma, conditions)


def solve_ne_corrupt(params: GameParameters) -> EquilibriumResult:
    """Nash equilibrium when the insider is known to be corrupt; it always plays gamma_max."""
    if params.c_attacker_to_insider <= params.c_insider:
        raise HypothesisViolation("a corrupt insider needs c_attacker_to_insider > c_insider")
    sigma, gm = params.sigma, params.gamma_max
    slow = sigma <= 1 / (1 - gm)
    branch = _B.NE_CORRUPT_SLOW if slow else _B.NE_CORRUPT_FAST
    profile = _check_bounds(_profile_for(branch, params, gm), params)
    conditions = ((_B.NE_CORRUPT_SLOW.value, slow), (_B.NE_CORRUPT_FAST.value, not slow))
    return EquilibriumResult(profile, branch, sigma, conditions)


# -- brute-force verification ------------------------------------------------------

Mode = Union[str, InsiderType]


@dataclass(frozen=True)
class VerificationReport:
    verified: bool
    gains: dict          # player -> best improvement over the candidate
    deviations: dict     # player -> maximising grid strategy
    tolerance: float
    grid_step: float


def _axis(upper: float, step: float, name: str) -> np.ndarray:
    if not upper > 0:
        raise DomainError(f"degenerate strategy interval for {name}: [0, {upper}]")
    n = int(np.floor(upper / step + 1e-9)) + 1
    if n < 100:
        raise DomainError(f"grid_step {step} leaves only {n} points on the {name} axis (need >= 100)")
    axis = np.linspace(0.0, (n - 1) * step, n)
    if axis[-1] < upper:
        axis = np.append(axis, upper)
    return axis


def _payoff_fns(params: GameParameters, mode: Mode):
    if mode == "bayesian":
        return (lambda a, b, g: game.expected_payoffs(a, b, g, params)[0],
                lambda a, b, g: game.expected_payoffs(a, b, g, params)[1],
                lambda a, b, g: game.expected_payoffs(a, b, g, params)[2])
    if isinstance(mode, str):
        mode = InsiderType(mode)
    return (lambda a, b, g: game.defender_payoff(a, b, g, params),
            lambda a, b, g: game.attacker_payoff(a, b, g, params, mode),
            lambda a, b, g: game.insider_payoff(a, b, g, params, mode))


def verify_equilibrium(profile: StrategyProfile, params: GameParameters, mode: Mode = "bayesian",
                       grid_step: float = 1e-3, tolerance: float = 1e-6) -> VerificationReport:
    """Unilateral-deviation sweep on a uniform grid over each player's strategy interval.

    ``mode`` is ``"bayesian"`` (belief-weighted payoffs) or an `InsiderType`
    (payoffs under that certain type).  The candidate is verified iff no
    player gains more than ``tolerance`` by any grid deviation.
    """
    if not grid_step > 0 or not tolerance > 0:
        raise DomainError("grid_step and tolerance must be positive")
    profile.validate(params)
    u_d, u_a, u_i = _payoff_fns(params, mode)
    a0, b0, g0 = profile.alpha, profile.beta, profile.gamma

    gains, deviations = {}, {}
    sweeps = (
        ("defender", _axis(params.alpha_max, grid_step, "alpha"), lambda s: u_d(s, b0, g0), u_d),
        ("attacker", _axis(params.beta_max, grid_step, "beta"), lambda s: u_a(a0, s, g0), u_a),
        ("insider", _axis(params.gamma_max, grid_step, "gamma"), lambda s: u_i(a0, b0, s), u_i),
    )
    for player, axis, sweep, fn in sweeps:
        values = np.broadcast_to(np.asarray(sweep(axis), dtype=float), axis.shape)
        best = int(np.argmax(values))
        gains[player] = float(values[best] - float(fn(a0, b0, g0)))
        deviations[player] = float(axis[best])
    verified = all(g <= tolerance for g in gains.values())
    return VerificationReport(verified, gains, deviations, tolerance, grid_step)


# -- equilibrium value of the defender ------------------------------------------------

@dataclass(frozen=True)
class EquilibriumBenefit:
    sigma: float
    value: Optional[float]
    branch: Optional[EquilibriumBranch]
    ambiguous: tuple = ()          # other branches whose conditions also hold
    hypothesis_violations: tuple = ()

    @property
    def defined(self) -> bool:
        return self.value is not None


def _closed_form_value(branch: EquilibriumBranch, sigma: float, gamma_bar: float) -> float:
    if branch.regime is Regime.SLOW:
        return 0.0
    if branch.value.endswith("gamma0"):
        return 1.0 - 1.0 / sigma
    return 1.0 - gamma_bar - 1.0 / sigma


def malicious_hypothesis_violations(params: GameParameters):
    ci = params.c_insider
    return () if 0.5 < ci < 1 else (f"c_insider={ci} outside (1/2, 1)",)


def bayesian_hypothesis_violations(params: GameParameters):
    theta = params.theta
    ci, cai = params.c_insider, params.c_attacker_to_insider
    out = []
    lower = (theta + 1) * ci - theta * cai
    upper = (theta - 1) * ci - theta * cai
    if not 0 < lower < 0.5:
        out.append(f"(theta+1)C_I - theta C_AI = {lower:.6g} outside (0, 1/2)")
    if not -1 < upper < -0.5:
        out.append(f"(theta-1)C_I - theta C_AI = {upper:.6g} outside (-1, -1/2)")
    return tuple(out)


def equilibrium_defender_benefit(params: GameParameters, model: str = "bayesian",
                                 gamma: Optional[float] = None,
                                 rule: str = "printed") -> EquilibriumBenefit:
    """Defender's equilibrium benefit at ``params.sigma``.

    Slow-regime equilibria are worth 0, fast ones ``1 - 1/sigma`` or
    ``1 - gamma_bar - 1/sigma``.  When several printed Bayesian conditions hold
    at once the fast-regime branch is reported and the rest listed in
    ``ambiguous``.  A sigma in no branch yields ``value=None``.
    """
    sigma = params.sigma
    if model == "bayesian":
        violations = bayesian_hypothesis_violations(params) if params.theta2 > 0 else ()
        conditions = bne_conditions(params, rule)
        gamma_bar = params.gamma_max
    elif model == "malicious":
        violations = malicious_hypothesis_violations(params)
        conditions = malicious_conditions(params)
        gamma_bar = params.gamma_max
    elif model == "corrupt":
        violations = ()
        conditions = [(solve_ne_corrupt(params).branch, True)]
        gamma_bar = params.gamma_max
    elif model == "inadvertent":
        if gamma is None:
            raise DomainError("inadvertent model needs the leak fraction gamma")
        violations = ()
        conditions = [(solve_ne_inadvertent(params, gamma).branch, True)]
        gamma_bar = gamma
    else:
        raise DomainError(f"unknown model {model!r}")

    holding = [b for b, ok in conditions if ok]
    if not holding:
        return EquilibriumBenefit(sigma, None, None, (), violations)
    holding.sort(key=lambda b: b.regime is not Regime.FAST)
    chosen = holding[0]
    return EquilibriumBenefit(sigma, _closed_form_value(chosen, sigma, gamma_bar), chosen,
                              tuple(holding[1:]), violations)


def solve(params: GameParameters, model: str = "bayesian", gamma: Optional[float] = None,
          rule: str = "printed") -> Optional[EquilibriumResult]:
    """Dispatch to the solver for ``model``."""
    if model in ("bayesian", "bne"):
        return solve_bne(params, rule)
    if model == "malicious":
        return solve_ne_malicious(params)
    if model == "corrupt":
        return solve_ne_corrupt(params)
    if model == "inadvertent":
        if gamma is None:
            raise DomainError("inadvertent model needs the leak fraction gamma")
        return solve_ne_inadvertent(params, gamma)
    raise DomainError(f"unknown model {model!r}")
