"""Closed-form long-time asymptotics of the annealed survival probability.

Leading behaviour of ``<U(t)>`` by dimension:

* d = 1: ``prefactor / sqrt(pi t)``
* d = 2: ``prefactor / log t``
* d >= 3: a limit value in (0, 1)

:func:`responsive_asymptotic` evaluates the responsive-dormancy formulas in
all available readings (see :mod:`dormantwalk.renewal` for the ``stated``
and ``derived`` families), :func:`baseline_asymptotic` the no-dormancy and
stochastic-dormancy formulas, and :func:`crossover` the comparison
criteria between the strategies.  All Green values are expressed in the
occupation normalization (rate-``2d`` walk) unless a reading says
otherwise.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import lru_cache
import json
import math

from .green import green_d3
from .params import InvalidParameterError, ModelParams
from .renewal import c1_constant, c2_constant, effective_weight, k_constant

__all__ = [
    "AsymptoticReport",
    "CrossoverReport",
    "responsive_asymptotic",
    "derived_asymptotic",
    "baseline_asymptotic",
    "crossover",
    "DEFAULT_READING",
]

# reading reported as ``leading_value`` when several are available
DEFAULT_READING = {1: "theorem", 2: "harmonic", 3: "theorem_occupation"}


@dataclass(frozen=True)
class AsymptoticReport:
    """Leading asymptotic constant of one model in one dimension.

    ``leading_value`` is the d = 1 coefficient of ``1/sqrt(pi t)``, the
    d = 2 coefficient of ``1/log t``, or the d >= 3 limit.  ``readings``
    holds every evaluated variant by name and ``reading`` names the one in
    ``leading_value``.
    """

    regime: str
    model: str
    leading_value: float
    reading: str
    readings: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    t: float | None = None
    value_at_t: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "AsymptoticReport":
        return cls(**data)


@dataclass(frozen=True)
class CrossoverReport:
    """Both sides of each comparison between responsive and stochastic dormancy."""

    params: dict
    d1_s0: float
    d1_threshold: float
    d1_responsive_wins: bool
    d2_c2: dict
    d2_threshold: float
    d2_responsive_wins: dict
    d3_dimension: int
    d3_lhs: float
    d3_rhs: dict
    d3_condition_holds: dict
    d3_large_s1_limit: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _regime(d):
    return "d=1" if d == 1 else "d=2" if d == 2 else "d>=3"


@lru_cache(maxsize=16)
def _g0(d, normalization="occupation"):
    return green_d3((0,) * d, normalization)


def _evaluate(leading, regime_d, t):
    if t is None:
        return None
    if t <= 1 and regime_d == 2:
        raise InvalidParameterError("t must exceed 1 for the d = 2 form")
    if t <= 0:
        raise InvalidParameterError("t must be > 0")
    if regime_d == 1:
        return leading / math.sqrt(math.pi * t)
    if regime_d == 2:
        return leading / math.log(t)
    return leading


def _need_gamma(params):
    if params.gamma <= 0:
        raise InvalidParameterError("the asymptotics need gamma > 0")


def _theorem_d3(params, normalization):
    d, nu, g, s1 = params.d, params.nu, params.gamma, params.s1
    G = _g0(d, normalization)
    K = k_constant(params, normalization)
    return 1 - g * (G + s1 / (2 * d * nu)) / (nu + g * (G + s1 * K / (2 * d * nu))), K


def _proof_d3(params, normalization):
    d, nu, g, s1 = params.d, params.nu, params.gamma, params.s1
    G = _g0(d, normalization)
    K = k_constant(params, normalization)
    gt = (s1 + 2 * d * nu) * G / (2 * d * nu * nu + s1 * K)
    return 1 - g * gt / (1 + g * gt)


def _derived_value(params):
    d, nu, g = params.d, params.nu, params.gamma
    w = effective_weight(params)
    if d == 1:
        return w / (g * math.sqrt(nu))
    if d == 2:
        return math.pi * w / g
    gt = _g0(d, "discrete") / w
    return 1.0 / (1.0 + g * gt)


def responsive_asymptotic(params: ModelParams, t=None, reading=None) -> AsymptoticReport:
    """Responsive-dormancy asymptotics in every available reading.

    d = 1: ``2 (sqrt(nu) + s1 C1) / gamma`` (``"theorem"``; ``"proof"``
    writes the same quantity with the other constant).  d = 2:
    ``(4 pi nu + s1 C2) / gamma`` with ``C2`` read as ``"resolvent"``,
    ``"generating"`` or ``"harmonic"``.  d >= 3: the theorem form
    ``1 - gamma (G + s1/(2d nu)) / (nu + gamma (G + s1 K/(2d nu)))`` and the
    renewal form ``1 - gamma G~/(1 + gamma G~)``, each with ``G`` in the
    occupation or discrete normalization.  The ``"derived"`` reading is
    always included.  None of the stated readings read ``s0``.
    """
    _need_gamma(params)
    d, nu, g, s1 = params.d, params.nu, params.gamma, params.s1
    readings, constants = {}, {}
    if d == 1:
        c1 = c1_constant(params, "theorem")
        c1p = c1_constant(params, "proof")
        readings["theorem"] = 2 * (math.sqrt(nu) + s1 * c1) / g
        readings["proof"] = 2 * (nu + s1 * c1p) / (g * math.sqrt(nu))
        constants.update(C1=c1, C1_proof=c1p)
    elif d == 2:
        for name in ("resolvent", "generating", "harmonic"):
            c2 = c2_constant(params, name)
            constants[f"C2_{name}"] = c2
            readings[name] = (4 * math.pi * nu + s1 * c2) / g
    else:
        for norm in ("occupation", "discrete"):
            value, K = _theorem_d3(params, norm)
            readings[f"theorem_{norm}"] = value
            readings[f"proof_{norm}"] = _proof_d3(params, norm)
            constants[f"K_{norm}"] = K
            constants[f"G0_{norm}"] = _g0(d, norm)
    readings["derived"] = _derived_value(params)
    reading = reading or DEFAULT_READING[min(d, 3)]
    if reading not in readings:
        raise ValueError(f"reading {reading!r} not available; choose from {sorted(readings)}")
    leading = readings[reading]
    return AsymptoticReport(_regime(d), "responsive", leading, reading, readings, constants,
                            params.to_dict(), t, _evaluate(leading, min(d, 3), t))


def derived_asymptotic(params: ModelParams, t=None) -> AsymptoticReport:
    """Shortcut for the ``"derived"`` reading of :func:`responsive_asymptotic`."""
    return responsive_asymptotic(params, t, reading="derived")


def baseline_asymptotic(params: ModelParams, model="none", t=None) -> AsymptoticReport:
    """No-dormancy (``"none"``) or stochastic-dormancy (``"stochastic"``) asymptotics.

    ``"none"`` ignores ``s0`` and ``s1``; ``"stochastic"`` switches at
    constant rates ``s1`` (to dormant) and ``s0`` (to active).
    """
    _need_gamma(params)
    d, nu, g = params.d, params.nu, params.gamma
    s0, s1, rho, kappa = params.s0, params.s1, params.rho, params.kappa
    if model == "none":
        if d == 1:
            leading = 2 * math.sqrt(nu) / g
        elif d == 2:
            leading = 4 * math.pi * nu / g
        else:
            G = _g0(d)
            leading = 1 - g * G / (nu + g * G)
    elif model == "stochastic":
        if s1 <= 0:
            raise InvalidParameterError("stochastic dormancy needs s1 > 0")
        if d == 1:
            leading = 2 * math.sqrt((s0 + s1) * (s0 * nu + s1 * rho)) / (s0 * g)
        elif d == 2:
            leading = 4 * math.pi * (s1 / s0 * rho + rho + kappa) / g
        else:
            G = _g0(d)
            frac = s0 / (s0 + s1)
            leading = 1 - g * G / (frac * (rho + frac * kappa) + g * G)
    else:
        raise ValueError(f"model must be 'none' or 'stochastic', got {model!r}")
    return AsymptoticReport(_regime(d), model, leading, "closed_form", {"closed_form": leading},
                            {}, params.to_dict(), t, _evaluate(leading, min(d, 3), t))


def crossover(params: ModelParams) -> CrossoverReport:
    """Evaluate the comparison criteria between responsive and stochastic dormancy.

    * d = 1: responsive wins at large ``s1`` iff ``s0 > 2 rho^{3/2} sqrt(nu)``.
    * d = 2: responsive wins iff ``C2 > 4 pi rho / s0`` (every ``C2`` reading).
    * d >= 3: the limit increases in ``s1`` when ``nu < gamma G(0) (K - 1)``,
      and tends to ``1 - 1/K`` as ``s1 -> inf``.  Evaluated in ``params.d``
      when it is at least 3, otherwise in d = 3.
    """
    nu, rho, s0, g = params.nu, params.rho, params.s0, params.gamma
    d1_rhs = 2 * rho ** 1.5 * math.sqrt(nu)
    p2 = params.replace(d=2)
    c2 = {name: c2_constant(p2, name) for name in ("resolvent", "generating", "harmonic")}
    d2_rhs = 4 * math.pi * rho / s0
    d3 = params.d if params.d >= 3 else 3
    p3 = params.replace(d=d3)
    rhs, holds, limit = {}, {}, {}
    for norm in ("occupation", "discrete"):
        K = k_constant(p3, norm)
        rhs[norm] = g * _g0(d3, norm) * (K - 1)
        holds[norm] = nu < rhs[norm]
        limit[norm] = 1 - 1 / K if K != 0 else -math.inf
    return CrossoverReport(
        params.to_dict(), s0, d1_rhs, s0 > d1_rhs,
        c2, d2_rhs, {k: v > d2_rhs for k, v in c2.items()},
        d3, nu, rhs, holds, limit,
    )
