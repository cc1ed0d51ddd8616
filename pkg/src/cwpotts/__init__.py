"""Dynamical Gibbs/non-Gibbs phase diagram of the time-evolved Curie-Weiss
Potts model: potential, catastrophe geometry, critical lines, finite-n
oracle."""

from .model import ModelParams, time_reparam, transition_kernel
from .potential import chi, gamma, hs_value

__all__ = ["ModelParams", "chi", "gamma", "hs_value", "time_reparam", "transition_kernel"]
__version__ = "0.1.0"
