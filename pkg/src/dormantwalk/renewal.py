"""Renewal layer: regeneration at (0, active) and the law of Z1.

Every visit to (0, active) ends without killing with probability ``mu``,
and the pair process regenerates on each return.  With ``F`` the law of
the return time ``Z1``, the Laplace transform of ``<U(t)>`` is

    G_mu(lam) = (mu / lam) (1 - E e^{-lam Z1}) / (1 - mu E e^{-lam Z1}).

Small-``lam`` behaviour of ``E e^{-lam Z1}`` (d = 1, 2) and the escape
probability ``P(Z1 = inf)`` (d >= 3) are built from the decomposition of
Z1 after leaving (0, active): with probability ``2d nu / (2d nu + s1)``
the walker steps off the trap while active; otherwise it falls dormant and
the trap performs a discrete walk ``Y`` from distance 1 that is stopped by
a geometric clock (the wake-up), restarting whenever it hits the trap
position first.

Two families of formulas are provided.

``form="stated"``
    The closed forms as usually stated: geometric clock driven by the
    dormancy rate ``s1`` and, in d >= 3, the identity
    ``E[G(Y)] P(G < tau0) = G(e1)``.
``form="derived"``
    Formulas re-derived from the generator: the clock is the wake-up rate
    ``s0`` (a dormant walker away from the trap wakes at rate ``s0``), and
    in d >= 3 the identity is applied to ``G(0) - G(x)``, which vanishes at
    the origin.  With ``W = 2d nu + s1 / P(G < tau0)`` the three regimes
    read ``W / sqrt(nu)`` (d = 1 transform coefficient), ``pi W``
    (d = 2) and ``G~ = G(0) / W`` (d >= 3, discrete Green value).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math
import warnings

import numpy as np

from . import _kernels
from .green import green_d3, green_generating, green_resolvent, potential_kernel
from .model import map_chunks
from .params import InvalidParameterError, ModelParams, NonConvergenceError

__all__ = [
    "GeometricClock",
    "DiscountedTransform",
    "Z1Law",
    "EscapeProbability",
    "HarmonicIdentityReport",
    "ExpansionRangeWarning",
    "EXPANSION_LAMBDA_MAX",
    "discounted_transform",
    "clock_escape_probability",
    "clock_escape_mc",
    "expected_y_1d",
    "c1_constant",
    "c2_constant",
    "k_constant",
    "effective_weight",
    "z1_laplace_expansion",
    "z1_law",
    "escape_probability_d3",
    "harmonic_function",
    "harmonic_identity_check",
    "martingale_check",
    "geometric_sum_check",
]

EXPANSION_LAMBDA_MAX = 1e-2
C2_READINGS = ("resolvent", "generating", "harmonic")
D3_READINGS = ("occupation", "discrete", "derived")


class ExpansionRangeWarning(UserWarning):
    """A small-``lam`` expansion was evaluated outside its validity window."""


@dataclass(frozen=True)
class GeometricClock:
    """Discrete clock: each trap step is followed by another with probability ``q``."""

    q: float

    def __post_init__(self):
        if not 0 <= self.q <= 1:
            raise InvalidParameterError(f"q must lie in [0, 1], got {self.q}")

    @property
    def p(self) -> float:
        return 1.0 - self.q

    @classmethod
    def for_params(cls, params: ModelParams, clock="s1") -> "GeometricClock":
        """``q = 2d rho / (r + 2d rho)`` with ``r`` the rate named by ``clock``."""
        rate = _clock_rate(params, clock)
        return cls(2 * params.d * params.rho / (rate + 2 * params.d * params.rho))


@dataclass(frozen=True)
class DiscountedTransform:
    mu: float
    lam: np.ndarray
    value: np.ndarray


@dataclass(frozen=True)
class Z1Law:
    """Constants describing Z1 for one parameter block and one formula family."""

    params: ModelParams
    form: str
    clock_escape: float
    leading_constant: float | None = None  # d = 1, 2
    escape_probability: float | None = None  # d >= 3
    renewal_green: float | None = None  # d >= 3


@dataclass(frozen=True)
class EscapeProbability:
    """``P(Z1 = inf)`` in d >= 3 under one reading.

    ``renewal_green`` is the Green value of (0, active) that enters the
    limit ``v = 1 / (1 + gamma * renewal_green)``.  ``valid`` is false when
    the probability falls outside [0, 1]; nothing is clamped.
    """

    value: float
    renewal_green: float
    reading: str
    valid: bool
    k_constant: float | None = None

    def limit_value(self, gamma: float) -> float:
        return 1.0 / (1.0 + gamma * self.renewal_green)


@dataclass(frozen=True)
class HarmonicIdentityReport:
    """Monte Carlo check of ``E[h(Y)] P(G < tau0) = h(e1)``.

    ``predicted`` is ``h(e1) / P`` and ``corrected`` is
    ``(h(e1) - h(0)(1 - P)) / P``, which is what the optional stopping
    argument gives when ``h(0) != 0``.  ``z_score`` refers to ``predicted``.
    """

    h: str
    d: int
    n_trials: int
    mean: float
    stderr: float
    predicted: float
    corrected: float
    clock_escape: float
    acceptance: float
    acceptance_stderr: float
    z_score: float
    z_score_corrected: float
    h_e1: float
    h_0: float

    @property
    def product(self) -> float:
        return self.mean * self.clock_escape


def _clock_rate(params, clock):
    if clock == "s1":
        rate = params.s1
    elif clock == "s0":
        rate = params.s0
    else:
        raise ValueError(f"clock must be 's1' or 's0', got {clock!r}")
    if rate <= 0:
        raise InvalidParameterError(f"the geometric clock needs a positive {clock}")
    return rate


def discounted_transform(mu, laplace_f, lam):
    """``G_mu(lam) = (mu/lam) (1 - F(lam)) / (1 - mu F(lam))`` with ``F(lam) = E e^{-lam Z1}``.

    ``laplace_f`` is a callable or a number.  Raises
    :class:`NonConvergenceError` when ``1 - mu F`` drops below 1e-14.
    """
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lam_arr <= 0):
        raise InvalidParameterError("lam must be > 0")
    if not 0 < mu <= 1:
        raise InvalidParameterError(f"mu must lie in (0, 1], got {mu}")
    f = np.array([laplace_f(x) if callable(laplace_f) else laplace_f for x in lam_arr],
                 dtype=float)
    if np.any((f < 0) | (f > 1)):
        raise InvalidParameterError("the Laplace transform of Z1 must lie in [0, 1]")
    denom = 1.0 - mu * f
    if np.any(denom < 1e-14):
        raise NonConvergenceError(
            "denominator 1 - mu F(lam) below 1e-14", values=tuple(denom[denom < 1e-14])
        )
    if mu == 1:
        value = 1.0 / lam_arr
    else:
        value = (mu / lam_arr) * (1.0 - f) / denom
    return float(value[0]) if np.ndim(lam) == 0 else value


@lru_cache(maxsize=4096)
def _gen(d, x, s):
    return green_generating(d, x, s).value


@lru_cache(maxsize=8)
def _g0_disc(d):
    return green_d3((0,) * d)


def _e1(d):
    return (1,) + (0,) * (d - 1)


def clock_escape_probability(params: ModelParams, clock="s1") -> float:
    """``P(G < tau0)``: the clock fires before the walk from e1 hits 0.

    d = 1 uses the closed form ``(sqrt(r^2 + 4 rho r) - r) / (2 rho)``;
    d >= 2 uses ``1 - G(e1, q) / G(0, q)`` in the generating convention.
    """
    rate = _clock_rate(params, clock)
    d = params.d
    if d == 1:
        return (math.sqrt(rate * rate + 4 * params.rho * rate) - rate) / (2 * params.rho)
    q = GeometricClock.for_params(params, clock).q
    return 1.0 - _gen(d, _e1(d), q) / _gen(d, (0,) * d, q)


def expected_y_1d(params: ModelParams, clock="s1") -> float:
    """``E|Y| = 1 / P(G < tau0)`` in d = 1, i.e. ``2 rho / (sqrt(r^2 + 4 rho r) - r)``."""
    rate = _clock_rate(params, clock)
    return 2 * params.rho / (math.sqrt(rate * rate + 4 * params.rho * rate) - rate)


def c1_constant(params: ModelParams, variant="theorem") -> float:
    """d = 1 constant: ``1/(sqrt(nu)(sqrt(s1^2+4 rho s1)-s1))`` or, ``variant="proof"``, without ``sqrt(nu)``."""
    s1 = params.s1
    if s1 == 0:
        return 0.0
    root = math.sqrt(s1 * s1 + 4 * params.rho * s1) - s1
    if variant == "theorem":
        return 1.0 / (math.sqrt(params.nu) * root)
    if variant == "proof":
        return 1.0 / root
    raise ValueError(f"unknown variant {variant!r}")


def c2_constant(params: ModelParams, reading="harmonic", clock="s1") -> float:
    """d = 2 constant under one reading of the Green objects.

    ``"resolvent"``: ``pi G(0,q) / (R(0,1) + G(e1,q))`` with ``R(0,1)`` the
    resolvent at ``lam = 1``.  ``"generating"``: ``G(0,1)`` is the divergent
    generating function at 1, so the constant is 0.  ``"harmonic"``:
    ``pi / P(G < tau0) = pi G(0,q) / (G(0,q) - G(e1,q))``.
    """
    p2 = params if params.d == 2 else params.replace(d=2)
    if p2.s1 == 0 and clock == "s1":
        return 0.0
    q = GeometricClock.for_params(p2, clock).q
    g0 = _gen(2, (0, 0), q)
    g1 = _gen(2, (1, 0), q)
    if reading == "resolvent":
        return math.pi * g0 / (green_resolvent(2, (0, 0), 1.0).value + g1)
    if reading == "generating":
        return 0.0
    if reading == "harmonic":
        return math.pi * g0 / (g0 - g1)
    raise ValueError(f"unknown C2 reading {reading!r}")


def k_constant(params: ModelParams, normalization="occupation", clock="s1") -> float:
    """``K_d = G_d(e1) G(0,q) / (G(0,q) - G(e1,q))`` with ``G_d(e1)`` in the given normalization."""
    d = params.d
    if d < 3:
        raise InvalidParameterError("K_d is defined for d >= 3")
    rate = params.s1 if clock == "s1" else _clock_rate(params, clock)
    # s1 = 0 gives q = 1, where the generating function is finite for d >= 3
    q = 2 * d * params.rho / (rate + 2 * d * params.rho)
    g0 = _gen(d, (0,) * d, q)
    g1 = _gen(d, _e1(d), q)
    return green_d3(_e1(d), normalization) * g0 / (g0 - g1)


def effective_weight(params: ModelParams) -> float:
    """``W = 2d nu + s1 / P(G < tau0)`` with the wake-up clock ``s0``."""
    w = 2 * params.d * params.nu
    if params.s1 > 0:
        w += params.s1 / clock_escape_probability(params, "s0")
    return w


def z1_laplace_expansion(params: ModelParams, lam, form="stated", reading="harmonic") -> float:
    """Leading-order ``E[exp(-lam Z1)]`` for small ``lam`` (d = 1, 2).

    d = 1: ``1 - 2 sqrt(lam) (nu + sqrt(nu) s1 C1) / (sqrt(nu) (s1 + 2 nu))``
    (``form="stated"``) or ``1 - sqrt(lam) W / (sqrt(nu)(s1 + 2 nu))``
    (``form="derived"``).  d = 2: ``1 - (4 pi nu + s1 C2) / ((s1 + 4 nu) log(1/lam))``
    with ``C2`` under ``reading``, or ``pi W`` in place of the numerator for
    ``form="derived"``.  Values of ``lam`` above 1e-2 are evaluated but an
    :class:`ExpansionRangeWarning` is issued.
    """
    if not lam > 0:
        raise InvalidParameterError(f"lam must be > 0, got {lam}")
    if lam > EXPANSION_LAMBDA_MAX:
        warnings.warn(f"lam = {lam:g} is outside the expansion window lam <= "
                      f"{EXPANSION_LAMBDA_MAX:g}", ExpansionRangeWarning, stacklevel=2)
    return 1.0 - _z1_coefficient(params, form, reading) * _scale(params.d, lam)


def _scale(d, lam):
    if d == 1:
        return math.sqrt(lam)
    if d == 2:
        return 1.0 / math.log(1.0 / lam)
    raise InvalidParameterError("the Laplace expansion of Z1 is for d = 1 or 2")


def _z1_coefficient(params, form, reading):
    nu, s1, d = params.nu, params.s1, params.d
    denom = s1 + 2 * d * nu
    if form == "derived":
        w = effective_weight(params)
        return w / (math.sqrt(nu) * denom) if d == 1 else math.pi * w / denom
    if form != "stated":
        raise ValueError(f"form must be 'stated' or 'derived', got {form!r}")
    if d == 1:
        return 2 * (nu + math.sqrt(nu) * s1 * c1_constant(params)) / (math.sqrt(nu) * denom)
    if d == 2:
        return (4 * nu * math.pi + s1 * c2_constant(params, reading)) / denom
    raise InvalidParameterError("the Laplace expansion of Z1 is for d = 1 or 2")


def escape_probability_d3(params: ModelParams, reading="occupation") -> EscapeProbability:
    """``P(Z1 = inf)`` for d >= 3.

    ``reading="occupation"`` or ``"discrete"`` evaluates

        1 - (2d nu^2 + s1 K_d) / ((s1 + 2d nu) G_d(0))

    with ``G_d`` in that normalization, and ``renewal_green = 1/(1 - P)``.
    ``reading="derived"`` evaluates ``W / ((2d nu + s1) G_d(0))`` with the
    discrete Green value, and ``renewal_green = G_d(0) / W``.
    """
    d = params.d
    if d < 3:
        raise InvalidParameterError("the escape probability is for d >= 3")
    nu, s1 = params.nu, params.s1
    if reading == "derived":
        g0 = _g0_disc(d)
        w = effective_weight(params)
        value = w / ((2 * d * nu + s1) * g0)
        return EscapeProbability(value, g0 / w, reading, 0.0 <= value <= 1.0)
    if reading not in ("occupation", "discrete"):
        raise ValueError(f"unknown reading {reading!r}")
    g0 = green_d3((0,) * d, reading)
    kd = k_constant(params, reading)
    numer = 2 * d * nu * nu + s1 * kd
    value = 1.0 - numer / ((s1 + 2 * d * nu) * g0)
    return EscapeProbability(value, (s1 + 2 * d * nu) * g0 / numer, reading,
                             0.0 <= value <= 1.0, kd)


def z1_law(params: ModelParams, form="stated", reading=None) -> Z1Law:
    """Bundle the Z1 constants of one formula family."""
    clock = "s0" if form == "derived" else "s1"
    p_esc = clock_escape_probability(params, clock) if _has_clock(params, clock) else 1.0
    if params.d <= 2:
        return Z1Law(params, form, p_esc,
                     leading_constant=_z1_coefficient(params, form, reading or "harmonic"))
    esc = escape_probability_d3(params, "derived" if form == "derived" else
                                (reading or "occupation"))
    return Z1Law(params, form, p_esc, escape_probability=esc.value,
                 renewal_green=esc.renewal_green)


def _has_clock(params, clock):
    return (params.s1 if clock == "s1" else params.s0) > 0


# -- Monte Carlo checks of the discrete clock ----------------------------


HARMONIC_IDS = {"abs_d1": 1, "potential_d2": 2, "green_d3": 3}


def harmonic_function(h: str):
    """Return ``(d, f)`` with ``f`` mapping an (n, d) integer array to ``h`` values."""
    if h not in HARMONIC_IDS:
        raise ValueError(f"h must be one of {sorted(HARMONIC_IDS)}, got {h!r}")
    d = HARMONIC_IDS[h]
    if h == "abs_d1":
        return d, lambda sites: np.abs(np.asarray(sites)[:, 0]).astype(float)
    single = (lambda x: potential_kernel(x).value) if h == "potential_d2" else green_d3
    return d, _symmetric_table(single)


def _symmetric_table(single):
    cache = {}

    def f(sites):
        sites = np.asarray(sites)
        keys = np.sort(np.abs(sites), axis=1)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        vals = np.empty(len(uniq))
        for i, key in enumerate(map(tuple, uniq)):
            if key not in cache:
                cache[key] = float(single(key))
            vals[i] = cache[key]
        return vals[np.ravel(inverse)]

    return f


def clock_escape_mc(params: ModelParams, n_trials: int, seed: int, clock="s1"):
    """Monte Carlo ``P(G < tau0)`` with its standard error, and the surviving positions."""
    clk = GeometricClock.for_params(params, clock)
    d = params.d

    def work(rng, size):
        hit = np.empty(size, dtype=np.bool_)
        final = np.empty((size, d), dtype=np.int64)
        _kernels.clock_trials(d, clk.q, rng, hit, final)
        return hit, final

    parts = map_chunks(work, seed, n_trials)
    hit = np.concatenate([p[0] for p in parts])
    final = np.concatenate([p[1] for p in parts])
    p_hat = 1.0 - hit.mean()
    se = math.sqrt(max(p_hat * (1 - p_hat), 1e-300) / n_trials)
    return float(p_hat), float(se), final[~hit]


def harmonic_identity_check(params: ModelParams, h: str, n_trials=10**6, seed=0,
                            clock="s1") -> HarmonicIdentityReport:
    """Estimate ``E[h(Y)]`` over clock trials that avoid 0 and compare with ``h(e1)/P``.

    ``Y`` is the walk position when the clock fires, conditioned on the
    walk not having hit 0 (rejection sampling; the acceptance rate is a
    second estimate of ``P(G < tau0)``).
    """
    d, f = harmonic_function(h)
    if params.d != d:
        params = params.replace(d=d)
    _clock_rate(params, clock)
    acc, acc_se, ys = clock_escape_mc(params, n_trials, seed, clock)
    if ys.shape[0] < 2:
        raise NonConvergenceError("fewer than two clock trials avoided the origin",
                                  values=(ys.shape[0],))
    vals = f(ys)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(vals.size))
    p = clock_escape_probability(params, clock)
    e1 = np.array([_e1(d)])
    h_e1 = float(f(e1)[0])
    h_0 = float(f(np.zeros((1, d), dtype=np.int64))[0])
    predicted = h_e1 / p
    corrected = (h_e1 - h_0 * (1.0 - p)) / p
    return HarmonicIdentityReport(
        h, d, int(n_trials), mean, se, predicted, corrected, p, acc, acc_se,
        (mean - predicted) / se, (mean - corrected) / se, h_e1, h_0,
    )


def martingale_check(h: str, n_steps: int, n_trials: int, seed: int):
    """Mean and standard error of ``h(X_{n ^ tau0})`` for the walk from e1, with ``h(e1)``."""
    d, f = harmonic_function(h)

    def work(rng, size):
        final = np.empty((size, d), dtype=np.int64)
        _kernels.stopped_walk(d, int(n_steps), rng, final)
        return final

    final = np.concatenate(map_chunks(work, seed, n_trials))
    vals = f(final)
    return (float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size)),
            float(f(np.array([_e1(d)]))[0]))


def geometric_sum_check(p: float, rate: float, lam: float, n_trials: int, seed: int):
    """MC vs closed form for ``E exp(-lam sum_{i<=G} X_i)``, ``X_i ~ Exp(rate)``.

    ``G`` counts failures before the first success, ``P(G = n) = (1-p)^n p``.
    Returns ``(mc_mean, mc_stderr, closed_form)``.
    """
    if not 0 < p <= 1:
        raise InvalidParameterError("p must lie in (0, 1]")

    def work(rng, size):
        g = rng.geometric(p, size) - 1
        s = rng.gamma(np.maximum(g, 1), 1.0 / rate) * (g > 0)
        return np.exp(-lam * s)

    w = np.concatenate(map_chunks(work, seed, n_trials))
    laplace_x = rate / (rate + lam)
    return (float(w.mean()), float(w.std(ddof=1) / math.sqrt(w.size)),
            p / (1.0 - (1.0 - p) * laplace_x))
