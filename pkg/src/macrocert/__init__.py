"""Certifying macroscopic superpositions against finite quantum reference frames."""

from .errors import (
    ConfigError,
    CutoffError,
    DegenerateBranchError,
    DomainError,
    MacrocertError,
    NotFoundError,
    SizingError,
)
from .number_states import (
    MixtureEnsemble,
    NumberState,
    RFSpec,
    make_coherent_rf,
    make_gaussian_grid_rf,
    make_sine_rf,
    make_spin_coherent_rf,
    make_two_branch,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CutoffError",
    "DegenerateBranchError",
    "DomainError",
    "MacrocertError",
    "MixtureEnsemble",
    "NotFoundError",
    "NumberState",
    "RFSpec",
    "SizingError",
    "make_coherent_rf",
    "make_gaussian_grid_rf",
    "make_sine_rf",
    "make_spin_coherent_rf",
    "make_two_branch",
]
