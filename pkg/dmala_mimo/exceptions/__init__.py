from dmala_mimo.exceptions.DmalaError import (
    ChannelError,
    ConfigError,
    DemapError,
    DmalaError,
    InstanceError,
    KernelError,
    OracleCapExceededError,
)

__all__ = [
    "DmalaError",
    "ConfigError",
    "OracleCapExceededError",
    "KernelError",
    "DemapError",
    "ChannelError",
    "InstanceError",
]
