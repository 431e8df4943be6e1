"""Lattice Green's functions of the simple symmetric random walk on Z^d.

Two conventions are kept apart throughout:

``resolvent``
    ``R_d(x, lam) = int e^{ik.x} / (lam + 1 - phi(k)) dk/(2pi)^d``, the
    resolvent of the rate-1 continuous-time walk (generator ``phi - 1``).
``generating``
    ``G_d(x, s) = sum_n s^n P(X_n = x)`` for the discrete-time walk.

They are related by ``G_d(x, s) = R_d(x, (1 - s)/s) / s``.  The occupation
Green's function of the rate-``2d`` continuous-time walk used by the
transient asymptotics is ``G_d(x, 1) / (2d)``.

Numerics use the Bessel representation

    R_d(x, lam) = int_0^inf e^{-lam t} prod_j ive(x_j, t/d) dt

integrated in ``u = log t`` by composite Gauss-Legendre with panel
doubling, small-``t`` power series and large-``t`` asymptotic tails.  A
periodic midpoint rule over the Brillouin zone is available as an
independent route for moderate ``lam``.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from .params import NonConvergenceError

__all__ = [
    "GreenValue",
    "PotentialKernelValue",
    "structure_function",
    "green_resolvent",
    "green_generating",
    "green_d3",
    "occupation_green",
    "potential_kernel",
    "error_kernel",
    "hitting_transform_1d",
    "brillouin_integral",
]

RTOL = 1e-10
_GL_ORDER = 12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)
_T_SMALL = 1e-12
_T_CAP = 1e12
_MAX_DOUBLINGS = 8
_HANKEL_SWITCH = 1e7


@dataclass(frozen=True)
class GreenValue:
    """A tagged lattice Green kernel evaluation."""

    dim: int
    convention: str
    argument: tuple
    parameter: float
    value: float
    est_error: float

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class PotentialKernelValue:
    argument: tuple
    value: float
    est_error: float

    def __float__(self):
        return float(self.value)


def structure_function(k):
    """phi(k) = mean_j cos(k_j); the last axis of ``k`` indexes coordinates."""
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k[None]
    return np.cos(k).mean(axis=-1)


def _as_site(x, d=None):
    x = tuple(abs(int(c)) for c in np.atleast_1d(x))
    if d is not None and len(x) != d:
        raise ValueError(f"site {x} does not have dimension {d}")
    return x


def _composite_gl(f, a, b, rtol=RTOL, panels=64):
    """Integrate ``f`` on [a, b] with panel doubling.

    Returns ``(value, est_error)``; ``est_error`` is the change at the last
    doubling.
    """
    prev = None
    for _ in range(_MAX_DOUBLINGS + 1):
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        fv = f(nodes)
        value = float(np.dot(weights, fv))
        if prev is not None:
            err = abs(value - prev)
            # values far below the integrand scale can only be resolved to round-off
            floor = 1e-14 * float(np.dot(weights, np.abs(fv)))
            if err <= max(rtol * abs(value), floor, 1e-300):
                return value, err
        prev = value
        panels *= 2
    raise NonConvergenceError(
        f"quadrature did not reach rtol={rtol:g} after {_MAX_DOUBLINGS} doublings",
        values=(prev, value),
    )


def _ive(n, z):
    """Exponentially scaled I_n(z); Hankel expansion where scipy overflows."""
    z = np.asarray(z, dtype=float)
    big = z > _HANKEL_SWITCH
    out = special.ive(n, np.where(big, 1.0, z))
    if np.any(big):
        zb = z[big]
        m = 4.0 * n * n
        term = np.ones_like(zb)
        series = np.ones_like(zb)
        for k in range(1, 4):
            term = -term * (m - (2 * k - 1) ** 2) / (k * 8.0 * zb)
            series = series + term
        out[big] = series / np.sqrt(2 * np.pi * zb)
    return out


def _bessel_product(x, d, t):
    out = np.ones_like(t)
    for xj in x:
        out = out * _ive(xj, t / d)
    return out


def _small_t_piece(x, d, eps):
    # leading power-series term of prod_j ive(x_j, t/d) integrated on [0, eps]
    n = sum(x)
    coeff = 1.0
    for xj in x:
        coeff /= math.factorial(xj)
    return coeff * eps ** (n + 1) / ((n + 1) * (2.0 * d) ** n)


def _large_t_tail(x, d, T):
    """int_T^inf prod_j ive(x_j, t/d) dt from the Hankel expansion (d >= 3)."""
    a = d / 2.0
    c = sum((4 * xj * xj - 1) for xj in x) * d / 8.0
    pref = (d / (2 * math.pi)) ** a
    lead = pref * T ** (1 - a) / (a - 1)
    corr = -pref * c * T ** (-a) / a
    return lead + corr, abs(corr) * 10.0 / T + 1e-300


def _bessel_resolvent(x, d, lam, rtol=RTOL):
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if lam == 0 and d <= 2:
        raise ValueError(f"the resolvent diverges at lam=0 in d={d}")
    if lam > 0:
        upper = 45.0 / lam
        tail, tail_err = 0.0, 0.0
    else:
        upper = _T_CAP
        tail, tail_err = _large_t_tail(x, d, upper)

    def f(u):
        t = np.exp(u)
        return t * np.exp(-lam * t) * _bessel_product(x, d, t)

    value, err = _composite_gl(f, math.log(_T_SMALL), math.log(upper), rtol=rtol)
    value += _small_t_piece(x, d, _T_SMALL) + tail
    return value, err + tail_err


def brillouin_integral(numerator, d, lam, rtol=RTOL, n_start=16, max_points=2**24):
    """Periodic midpoint rule over [-pi, pi]^d for ``numerator(k) / (lam + 1 - phi(k))``.

    ``numerator`` receives an array of shape (..., d) and returns a complex or
    real array.  Nodes sit at half-integer multiples of the spacing, so no
    node falls on ``k = 0``.  Returns ``(value, est_error, imag)``.
    """
    n = n_start
    prev = None
    while n ** d <= max_points:
        h = 2 * np.pi / n
        axis = -np.pi + (np.arange(n) + 0.5) * h
        grids = np.meshgrid(*([axis] * d), indexing="ij", sparse=False)
        k = np.stack(grids, axis=-1)
        vals = numerator(k) / (lam + 1.0 - structure_function(k))
        total = vals.mean()
        value = float(np.real(total))
        imag = float(np.imag(total)) if np.iscomplexobj(total) else 0.0
        if prev is not None:
            err = abs(value - prev)
            floor = 1e-14 * float(np.abs(vals).mean())
            if err <= max(rtol * abs(value), floor, 1e-300):
                return value, err, imag
        prev = value
        n *= 2
    raise NonConvergenceError(
        f"Brillouin quadrature did not reach rtol={rtol:g} within {max_points} nodes",
        values=(prev,),
    )


def green_resolvent(d, x, lam, method="auto", rtol=RTOL) -> GreenValue:
    """Resolvent kernel ``R_d(x, lam)`` for ``lam > 0``.

    ``method`` is ``"bessel"``, ``"brillouin"`` or ``"auto"`` (Brillouin
    zone for ``lam >= 1e-2`` in ``d <= 3``, Bessel integral otherwise).
    """
    x = _as_site(x, d)
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    if method == "auto":
        method = "brillouin" if (lam >= 1e-2 and d <= 3) else "bessel"
    if method == "brillouin":
        xv = np.asarray(x, dtype=float)

        def numerator(k):
            return np.exp(1j * (k @ xv))

        value, err, imag = brillouin_integral(numerator, d, lam, rtol=rtol)
        if abs(imag) > 1e-12:
            raise NonConvergenceError(
                f"imaginary part {imag:g} of a real kernel exceeds 1e-12", values=(imag,)
            )
    elif method == "bessel":
        value, err = _bessel_resolvent(x, d, lam, rtol=rtol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GreenValue(d, "resolvent", x, float(lam), value, err)


def green_generating(d, x, s, method="auto", rtol=RTOL) -> GreenValue:
    """Generating function ``sum_n s^n P(X_n = x)`` of the discrete walk."""
    x = _as_site(x, d)
    if s < 0 or s > 1:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    if s == 0:
        return GreenValue(d, "generating", x, 0.0, float(not any(x)), 0.0)
    if s == 1:
        if d <= 2:
            return GreenValue(d, "generating", x, 1.0, math.inf, 0.0)
        value, err = _bessel_resolvent(x, d, 0.0, rtol=rtol)
        return GreenValue(d, "generating", x, 1.0, value, err)
    r = green_resolvent(d, x, (1 - s) / s, method=method, rtol=rtol)
    return GreenValue(d, "generating", x, float(s), r.value / s, r.est_error / s)


def green_d3(x, normalization="discrete", rtol=RTOL) -> float:
    """Green's function at ``lam = 0`` in a transient dimension.

    The dimension is ``len(x)`` and must be at least 3.  ``"discrete"``
    gives the expected number of visits of the discrete-time walk;
    ``"occupation"`` gives the expected time spent at ``x`` by the
    continuous-time walk with total jump rate ``2d`` (the discrete value
    divided by ``2d``).
    """
    x = _as_site(x)
    d = len(x)
    if d < 3:
        raise ValueError(f"green_d3 needs d >= 3, got d={d}")
    value, _ = _bessel_resolvent(x, d, 0.0, rtol=rtol)
    if normalization == "discrete":
        return value
    if normalization == "occupation":
        return value / (2 * d)
    raise ValueError(f"unknown normalization {normalization!r}")


def occupation_green(x) -> float:
    return green_d3(x, normalization="occupation")


def potential_kernel(x, rtol=RTOL) -> PotentialKernelValue:
    """Potential kernel ``a(x)`` of the planar walk, ``a(0) = 0``, ``a(e1) = 1``."""
    x = _as_site(x, 2)
    if not any(x):
        return PotentialKernelValue(x, 0.0, 0.0)

    def f(u):
        t = np.exp(u)
        return t * (_bessel_product((0, 0), 2, t) - _bessel_product(x, 2, t))

    value, err = _composite_gl(f, math.log(_T_SMALL), math.log(_T_CAP), rtol=rtol)
    value += _small_t_piece((0, 0), 2, _T_SMALL) - _small_t_piece(x, 2, _T_SMALL)
    # Hankel expansion of the integrand: |x|^2 / (pi t^2) + O(t^-3)
    r2 = x[0] ** 2 + x[1] ** 2
    value += r2 / (math.pi * _T_CAP)
    return PotentialKernelValue(x, value, err + r2 ** 2 / _T_CAP ** 2)


def error_kernel(x, lam, rtol=RTOL) -> float:
    """``E(x, lam) = int (1 - e^{ik.x}) (1/(1 + lam - phi) - 1/(1 - phi))``, d = 2.

    Non-positive, zero at ``x = 0``, and tends to zero as ``lam -> 0``.
    """
    x = _as_site(x, 2)
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    if not any(x):
        return 0.0

    def f(u):
        t = np.exp(u)
        diff = _bessel_product((0, 0), 2, t) - _bessel_product(x, 2, t)
        return t * (-special.expm1(-lam * t)) * diff

    upper = max(_T_CAP, 45.0 / lam)
    value, _ = _composite_gl(f, math.log(_T_SMALL), math.log(upper), rtol=rtol)
    r2 = x[0] ** 2 + x[1] ** 2
    return -(value + r2 / (math.pi * upper))


def hitting_transform_1d(nu, lam) -> float:
    """``E[exp(-lam R)]`` for the first passage from 1 to 0 of the rate-``2 nu`` walk on Z."""
    if nu <= 0:
        raise ValueError("nu must be > 0")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    b = lam + 2 * nu
    return 2 * nu / (b + math.sqrt(lam * (lam + 4 * nu)))
