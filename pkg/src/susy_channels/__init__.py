"""
Exactly solvable coupled-channel potentials from supersymmetric
(Darboux) coupling transformations of uncoupled channels.

Modules
-------
specfun     Riccati-Hankel functions, seed solutions, Wronskians.
onechannel  Uncoupled channel families with closed-form Jost functions.
coupling    The coupling transformation and the transformed potential.
scattering  Jost and S matrices, eigenphases, mixing angles, spectra.
oracle      Independent numerical check by direct integration.
scenario    JSON scenario files and presets.
cli         The ``susy-channels`` command.
"""

from .coupling import CouplingParams, DiagonalModel, TransformedModel
from .errors import (
    ContractError,
    DomainError,
    InconsistencyError,
    IntegrationError,
    MatchingError,
    SingularityError,
    SusyChannelsError,
    ValidationError,
)
from .onechannel import FAMILIES, OneChannelModel, build_family
from .scattering import CoupledJost, eigenphases, s_matrix, spectrum, transformed_jost

__version__ = "0.1.0"

__all__ = [
    "CouplingParams",
    "DiagonalModel",
    "TransformedModel",
    "CoupledJost",
    "OneChannelModel",
    "FAMILIES",
    "build_family",
    "transformed_jost",
    "s_matrix",
    "eigenphases",
    "spectrum",
    "SusyChannelsError",
    "DomainError",
    "ContractError",
    "ValidationError",
    "SingularityError",
    "InconsistencyError",
    "IntegrationError",
    "MatchingError",
]
