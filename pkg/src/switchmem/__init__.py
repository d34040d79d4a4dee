"""Quantum switch over depolarizing channels: effective dynamics and induced memory."""
from .depol import RateParams, eta_of_t, t_of_eta
from .dynamics import (
    DynamicsProfile,
    closed_form_C,
    closed_form_gamma,
    config_generator,
    cyclic_profile,
    numeric_profile,
    unequal_generators,
)
from .measures import (
    BlpResult,
    MeasureResult,
    asymptotic_bound_check,
    best_configuration,
    blp_memory,
    characteristic_eta,
    measure,
    rhp_memory,
    rhp_unequal,
)
from .qmat import DensityMatrix, KrausSet
from .switchnet import ControlSpec, OrderingSet, SwitchConfig, block_partitions

__all__ = [
    "BlpResult", "ControlSpec", "DensityMatrix", "DynamicsProfile", "KrausSet", "MeasureResult",
    "OrderingSet", "RateParams", "SwitchConfig", "asymptotic_bound_check", "best_configuration",
    "block_partitions", "blp_memory", "characteristic_eta", "closed_form_C", "closed_form_gamma",
    "config_generator", "cyclic_profile", "eta_of_t", "measure", "numeric_profile", "rhp_memory",
    "rhp_unequal", "t_of_eta", "unequal_generators",
]
