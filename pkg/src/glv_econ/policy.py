"""Per-iteration interventions on consumption rates."""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .validation import check_fraction


class PolicyKind(str, Enum):
    COMPULSORY_SAVING = "compulsory-saving"


@dataclass(frozen=True)
class PolicySpec:
    """Compulsory saving: agents poorer than ``wealth_threshold_frac`` of the
    mean wealth cut their consumption rate by ``consumption_cut_frac``."""

    kind: PolicyKind = PolicyKind.COMPULSORY_SAVING
    wealth_threshold_frac: float = 0.9
    consumption_cut_frac: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        check_fraction(self.wealth_threshold_frac, "wealth_threshold_frac", open_low=True, open_high=True)
        check_fraction(self.consumption_cut_frac, "consumption_cut_frac", open_low=True, open_high=True)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "wealth_threshold_frac": self.wealth_threshold_frac,
            "consumption_cut_frac": self.consumption_cut_frac,
        }


def apply_policy(spec, w_i, mean_wealth, omega_i):
    """Consumption rate for one agent after the policy is applied."""
    if mean_wealth <= 0:
        raise ValueError("mean_wealth must be positive")
    if omega_i <= 0:
        raise ValueError("omega_i must be positive")
    if w_i < spec.wealth_threshold_frac * mean_wealth:
        return omega_i * (1.0 - spec.consumption_cut_frac)
    return omega_i


def apply_policy_block(spec, wealth, mean_wealth, omega):
    """Vectorized :func:`apply_policy`; ``mean_wealth`` is taken before the step."""
    poor = wealth < spec.wealth_threshold_frac * mean_wealth
    return np.where(poor, omega * (1.0 - spec.consumption_cut_frac), omega)
