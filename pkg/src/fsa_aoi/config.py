"""Shared protocol configuration types and error classes."""
from __future__ import annotations

import enum
from dataclasses import dataclass


class ConfigError(ValueError):
    """A parameter is outside its valid domain. Message names the parameter."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its budget before reaching tolerance."""


class DegenerateChainError(RuntimeError):
    """The transition matrix has more than one recurrent class."""


class InsufficientSamplesError(RuntimeError):
    """Too few recorded events to form the requested estimate."""


class AmbiguousOptimumError(RuntimeError):
    """Adjacent grid points overlap within confidence half-widths."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class SchemeKind(enum.Enum):
    FSA_RD = "fsa-rd"
    FSA_RD_ONE = "fsa-rd-one"
    SLOTTED_ALOHA = "slotted-aloha"


@dataclass(frozen=True)
class ProtocolConfig:
    """Frame slotted ALOHA parameters: N users, M slots per frame
    (1 reservation slot with V mini-slots + M-1 data slots), per-slot status
    generation probability rho, per-frame reservation probability gamma.

    rho = 0 and gamma = 0 are rejected: the average age diverges and the
    active-user chain may become absorbing.
    """

    N: int
    M: int
    V: int
    rho: float
    gamma: float

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ConfigError(f"N must be an integer >= 1, got {self.N!r}")
        if not isinstance(self.V, int) or self.V < 1:
            raise ConfigError(f"V must be an integer >= 1, got {self.V!r}")
        if not isinstance(self.M, int) or not 2 <= self.M <= self.V + 1:
            raise ConfigError(
                f"M must be an integer in 2..V+1 = 2..{self.V + 1}, got {self.M!r}"
            )
        if not 0.0 < self.rho <= 1.0:
            raise ConfigError(f"rho must be in (0, 1], got {self.rho!r}")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma!r}")

    @property
    def frame_arrival_prob(self) -> float:
        """Probability 1-(1-rho)^M that a user turns active at a frame start."""
        return 1.0 - (1.0 - self.rho) ** self.M


@dataclass(frozen=True)
class AlohaConfig:
    """Slotted ALOHA baseline: N users, per-slot generation probability rho,
    per-slot transmission probability tau for packet holders."""

    N: int
    rho: float
    tau: float

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ConfigError(f"N must be an integer >= 1, got {self.N!r}")
        if not 0.0 < self.rho <= 1.0:
            raise ConfigError(f"rho must be in (0, 1], got {self.rho!r}")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must be in (0, 1], got {self.tau!r}")


@dataclass(frozen=True)
class SchemeSpec:
    """A scheme selector paired with the matching configuration object."""

    kind: SchemeKind
    config: ProtocolConfig | AlohaConfig

    def __post_init__(self):
        if self.kind is SchemeKind.SLOTTED_ALOHA:
            if not isinstance(self.config, AlohaConfig):
                raise ConfigError("scheme slotted-aloha requires an AlohaConfig")
        else:
            if not isinstance(self.config, ProtocolConfig):
                raise ConfigError(f"scheme {self.kind.value} requires a ProtocolConfig")
