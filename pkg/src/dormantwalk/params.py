"""Model parameters and states of the relative walker/trap process.

All jump rates are per neighbour: the walker (while active) and the trap
each jump to any of the ``2d`` nearest neighbours at rate ``kappa`` and
``rho`` respectively, so their total jump rates are ``2d*kappa`` and
``2d*rho``.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

__all__ = [
    "ModelParams",
    "PairState",
    "InvalidParameterError",
    "NonConvergenceError",
]


class InvalidParameterError(ValueError):
    """Raised when a parameter block violates a model invariant."""


class NonConvergenceError(ArithmeticError):
    """Raised when a numerical routine cannot reach its tolerance.

    The ``values`` attribute carries the last iterates (or the offending
    quantity) so callers can report them.
    """

    def __init__(self, message, values=()):
        super().__init__(message)
        self.values = tuple(values)


@dataclass(frozen=True)
class ModelParams:
    """Rates of the responsive-dormancy trapping model.

    Parameters
    ----------
    d : int
        Lattice dimension, 1 to 5.
    kappa : float
        Per-neighbour jump rate of an active walker.
    rho : float
        Per-neighbour jump rate of the trap.
    gamma : float
        Killing rate while an active walker sits on the trap.
    s0 : float
        Wake-up rate of a dormant walker away from the trap.
    s1 : float
        Dormancy rate of an active walker on the trap.
    """

    d: int = 1
    kappa: float = 1.0
    rho: float = 1.0
    gamma: float = 1.0
    s0: float = 1.0
    s1: float = 1.0

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or not 1 <= self.d <= 5:
            raise InvalidParameterError(f"d must be an integer in 1..5, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        for name in ("kappa", "rho", "gamma", "s0", "s1"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.kappa < 0:
            raise InvalidParameterError(f"kappa must be >= 0, got {self.kappa}")
        if self.rho <= 0:
            raise InvalidParameterError(f"rho must be > 0, got {self.rho}")
        if self.gamma < 0:
            raise InvalidParameterError(f"gamma must be >= 0, got {self.gamma}")
        if self.s0 <= 0:
            raise InvalidParameterError(f"s0 must be > 0, got {self.s0}")
        if self.s1 < 0:
            raise InvalidParameterError(f"s1 must be >= 0, got {self.s1}")

    @property
    def nu(self) -> float:
        """Per-neighbour rate of the relative position while active."""
        return self.kappa + self.rho

    @property
    def exit_rate_origin(self) -> float:
        """Total rate of leaving the state (0, active), killing excluded."""
        return 2 * self.d * self.nu + self.s1

    @property
    def mu(self) -> float:
        """Probability that a visit to (0, active) ends without killing."""
        a = self.exit_rate_origin
        return a / (a + self.gamma)

    def replace(self, **changes) -> "ModelParams":
        values = self.to_dict()
        values.update(changes)
        return ModelParams(**values)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "kappa": self.kappa,
            "rho": self.rho,
            "gamma": self.gamma,
            "s0": self.s0,
            "s1": self.s1,
        }


@dataclass(frozen=True)
class PairState:
    """Relative position ``z = X - Y`` and activity flag ``alpha``."""

    z: tuple
    alpha: int = 1

    def __post_init__(self):
        z = tuple(int(c) for c in np.atleast_1d(self.z))
        if len(z) == 0:
            raise InvalidParameterError("z must have at least one coordinate")
        if self.alpha not in (0, 1):
            raise InvalidParameterError(f"alpha must be 0 or 1, got {self.alpha!r}")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "alpha", int(self.alpha))

    @classmethod
    def origin(cls, d: int, alpha: int = 1) -> "PairState":
        return cls((0,) * d, alpha)

    @property
    def d(self) -> int:
        return len(self.z)

    @property
    def at_origin(self) -> bool:
        return not any(self.z)

    def exit_rate(self, params: ModelParams) -> float:
        """Closed-form total exit rate (killing excluded)."""
        rate = 2 * params.d * (self.alpha * params.kappa + params.rho)
        if self.at_origin and self.alpha == 1:
            rate += params.s1
        elif not self.at_origin and self.alpha == 0:
            rate += params.s0
        return rate

