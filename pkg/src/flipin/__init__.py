"""FlipIt game with a typed insider: equilibria, guidance analysis and simulations."""

__version__ = "0.1.0"

from .errors import (ConfigError, DomainError, EdgeCaseRoutingError, FlipInError,  # noqa: E402
                     HypothesisViolation, InternalConsistencyError, NoEquilibriumError)
from .game import (GameParameters, InsiderType, StrategyProfile, adcr,  # noqa: E402
                   control_fraction, defender_benefit, attacker_benefit, insider_benefit,
                   expected_benefits)
from .equilibrium import (EquilibriumBranch, EquilibriumResult, Regime,  # noqa: E402
                          auxiliary_quantities, equilibrium_defender_benefit, solve, solve_bne,
                          solve_ne_corrupt, solve_ne_inadvertent, solve_ne_malicious,
                          verify_equilibrium)
from .analysis import (advantage_intervals, benefit_curve, compare_strategies,  # noqa: E402
                       dominance_check, gdt_witness, key_points, recommend_sigma)
from .flipsim import (CampaignConfig, CampaignResult, Strategy, insider_schedule,  # noqa: E402
                      run_campaign, run_campaigns, sample_insider_type, simulate_flipit)
from .rse import (LtiSystem, RseConfig, corrupt_innovation, kalman_step,  # noqa: E402
                  riccati_fixed_point, run_rse_experiment, simulate_rse_run)
