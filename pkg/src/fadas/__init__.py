"""Buffered asynchronous federated learning with adaptive server optimizers."""

from fadas.core import (
    Algorithm,
    ConfigError,
    DelayProfile,
    EtaRule,
    HyperParams,
    ModelKind,
    ModelSpec,
    RngStreams,
    SimConfig,
    config_from_dict,
    config_to_dict,
    derive_stream,
    load_config,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "ConfigError",
    "DelayProfile",
    "EtaRule",
    "HyperParams",
    "ModelKind",
    "ModelSpec",
    "RngStreams",
    "SimConfig",
    "config_from_dict",
    "config_to_dict",
    "derive_stream",
    "load_config",
    "validate_config",
]
