"""Exact annealed survival on a truncated lattice box.

The killed pair process is restricted to the box ``{|z|_inf <= R}`` and the
distribution started at (0, active) is propagated by uniformization.  With
an absorbing box every path is in exactly one of three conditions at time t:
alive inside the box, killed, or escaped.  Hence

    alive_in_box(t)  <=  <U(t)>  <=  1 - killed_in_box(t),

and the two sides form the ``lower``/``upper`` bracket of a
:class:`SurvivalCurve`.  A reflecting box (boundary moves suppressed) is
available for comparison through :func:`evaluate_operator`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy import sparse, stats

from .params import ModelParams, NonConvergenceError

__all__ = [
    "TruncatedOperator",
    "SurvivalCurve",
    "LongTimeLimit",
    "MemoryBudgetError",
    "DEFAULT_RADIUS",
    "build_operator",
    "evaluate_operator",
    "survival",
    "expected_exposure",
    "long_time_limit",
]

DEFAULT_RADIUS = {1: 300, 2: 60, 3: 25, 4: 10, 5: 6}
MAX_STATES = 4_000_000
POISSON_TAIL = 1e-12


class MemoryBudgetError(MemoryError):
    def __init__(self, n_states, budget):
        super().__init__(
            f"truncated operator needs {n_states} states, budget is {budget}"
        )
        self.n_states = n_states
        self.budget = budget


@dataclass(frozen=True)
class TruncatedOperator:
    """Sub-generator of the killed pair process on a box.

    ``matrix[i, j]`` is the rate from state ``i`` to state ``j`` (row
    convention).  States are indexed ``alpha * M + flat(z + R)`` with
    ``M = (2R + 1)^d``.
    """

    params: ModelParams
    radius: int
    boundary: str
    matrix: sparse.csr_matrix
    outflow: np.ndarray  # rate of leaving the box, per state
    origin: int  # index of (0, active)

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]

    @property
    def sites(self) -> int:
        return (2 * self.radius + 1) ** self.params.d

    def state_index(self, z, alpha) -> int:
        z = np.asarray(z) + self.radius
        width = 2 * self.radius + 1
        flat = int(np.ravel_multi_index(tuple(z), (width,) * self.params.d))
        return alpha * self.sites + flat

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()


@dataclass(frozen=True)
class SurvivalCurve:
    times: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    radius: int = 0
    params: ModelParams | None = field(default=None, compare=False)

    @property
    def gap(self) -> np.ndarray:
        return self.upper - self.lower


@dataclass(frozen=True)
class LongTimeLimit:
    value: float
    lower: float
    gap: float
    t_max: float
    stabilization: float
    stabilized: bool
    tol: float


def build_operator(params: ModelParams, radius: int, boundary="absorbing",
                   max_states=MAX_STATES) -> TruncatedOperator:
    """Assemble the truncated sub-generator, killing at (0, active) included."""
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    if boundary not in ("absorbing", "reflecting"):
        raise ValueError(f"boundary must be 'absorbing' or 'reflecting', got {boundary!r}")
    d = params.d
    width = 2 * radius + 1
    sites = width ** d
    n = 2 * sites
    if n > max_states:
        raise MemoryBudgetError(n, max_states)

    coords = np.indices((width,) * d).reshape(d, -1).T - radius
    flat = np.arange(sites)
    strides = np.array([width ** (d - 1 - j) for j in range(d)])
    at_origin = ~coords.any(axis=1)
    origin_flat = int(flat[at_origin][0])

    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    outflow = np.zeros(n)
    for alpha in (0, 1):
        rate = alpha * params.kappa + params.rho
        base = alpha * sites
        for j in range(d):
            for step in (-1, 1):
                target = coords[:, j] + step
                inside = np.abs(target) <= radius
                src = flat[inside]
                rows.append(base + src)
                cols.append(base + src + step * strides[j])
                vals.append(np.full(src.size, rate))
                diag[base + src] -= rate
                if boundary == "absorbing":
                    leaving = base + flat[~inside]
                    diag[leaving] -= rate
                    outflow[leaving] += rate
    # dormancy on the trap, wake-up away from it
    if params.s1 > 0:
        rows.append(np.array([sites + origin_flat]))
        cols.append(np.array([origin_flat]))
        vals.append(np.array([params.s1]))
        diag[sites + origin_flat] -= params.s1
    away = flat[~at_origin]
    rows.append(away)
    cols.append(sites + away)
    vals.append(np.full(away.size, params.s0))
    diag[away] -= params.s0
    origin = sites + origin_flat
    diag[origin] -= params.gamma

    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    matrix = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return TruncatedOperator(params, int(radius), boundary, matrix, outflow, origin)


def _poisson_weights(rate_times, kmax):
    k = np.arange(kmax + 1)
    return stats.poisson.pmf(k[None, :], np.asarray(rate_times)[:, None])


def _propagate(op: TruncatedOperator, times, start=None):
    """Uniformized averages of alive/killed/escaped mass at each time."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted ascending")
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    gamma = op.params.gamma
    Lam = float(-op.matrix.diagonal().min())
    if Lam <= 0:
        ones = np.ones_like(times)
        return ones, np.zeros_like(times), np.zeros_like(times)
    t_last = times[-1] if times.size else 0.0
    kmax = int(stats.poisson.isf(POISSON_TAIL, Lam * t_last)) + 1 if t_last > 0 else 0
    transition = (sparse.identity(op.n_states, format="csr") + op.matrix / Lam).T.tocsr()
    p = np.zeros(op.n_states)
    p[op.origin if start is None else start] = 1.0
    alive = np.empty(kmax + 1)
    killed = np.empty(kmax + 1)
    escaped = np.empty(kmax + 1)
    k_acc = e_acc = 0.0
    out = op.outflow / Lam
    for k in range(kmax + 1):
        alive[k] = p.sum()
        killed[k] = k_acc
        escaped[k] = e_acc
        k_acc += p[op.origin] * gamma / Lam
        e_acc += p @ out
        p = transition @ p
    w = _poisson_weights(Lam * times, kmax)
    return w @ alive, w @ killed, w @ escaped


def evaluate_operator(op: TruncatedOperator, times):
    """Return ``(alive, killed, escaped)`` mass curves of ``op`` from (0, active)."""
    return _propagate(op, times)


def survival(params: ModelParams, radius=None, times=(0.0,), gap_tol=None) -> SurvivalCurve:
    """Bracketed ``<U(t)>`` from the absorbing box of the given radius.

    Raises :class:`NonConvergenceError` if ``gap_tol`` is given and the
    bracket is wider than that at any requested time.
    """
    radius = DEFAULT_RADIUS[params.d] if radius is None else radius
    times = np.asarray(times, dtype=float)
    op = build_operator(params, radius, "absorbing")
    alive, killed, _ = _propagate(op, times)
    lower = np.clip(alive, 0.0, 1.0)
    upper = np.clip(1.0 - killed, 0.0, 1.0)
    upper = np.maximum(upper, lower)
    curve = SurvivalCurve(times, lower, upper, radius, params)
    if gap_tol is not None and curve.gap.size and curve.gap.max() > gap_tol:
        raise NonConvergenceError(
            f"bracket gap {curve.gap.max():.3g} exceeds {gap_tol:g} at radius {radius}",
            values=(float(curve.gap.max()),),
        )
    return curve


def expected_exposure(params: ModelParams, radius=None, times=(1.0,), method="fd",
                      step=1e-4) -> np.ndarray:
    """``E[L_t]``, the expected time spent in (0, active) by the unkilled process.

    ``method="fd"`` differentiates the survival upper bound in ``gamma`` at 0
    by a forward difference of size ``step``; ``method="exact"`` integrates
    the occupation probability of (0, active) in closed form.
    """
    radius = DEFAULT_RADIUS[params.d] if radius is None else radius
    times = np.asarray(times, dtype=float)
    if method == "fd":
        op = build_operator(params.replace(gamma=step), radius)
        _, killed, _ = _propagate(op, times)
        return killed / step
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    op = build_operator(params.replace(gamma=0.0), radius)
    Lam = float(-op.matrix.diagonal().min())
    kmax = int(stats.poisson.isf(POISSON_TAIL, Lam * times.max())) + 1
    transition = (sparse.identity(op.n_states, format="csr") + op.matrix / Lam).T.tocsr()
    p = np.zeros(op.n_states)
    p[op.origin] = 1.0
    occ = np.empty(kmax + 1)
    for k in range(kmax + 1):
        occ[k] = p[op.origin]
        p = transition @ p
    k = np.arange(kmax + 1)
    # int_0^t Pois(k; Lam s) ds = P(N_{Lam t} >= k + 1) / Lam
    tail = stats.poisson.sf(k[None, :], Lam * times[:, None])
    return tail @ occ / Lam


def long_time_limit(params: ModelParams, radius=None, t_max=200.0, tol=1e-4) -> LongTimeLimit:
    """Survival at ``t_max`` in a transient dimension, with a stabilization check.

    The reported value is the upper bracket ``1 - killed``; the returned
    ``stabilization`` is ``|value(t_max) - value(t_max / 2)|`` and a
    :class:`RuntimeWarning` is issued when it exceeds ``tol``.
    """
    if params.d < 3:
        raise ValueError("the survival limit is non-trivial only for d >= 3")
    curve = survival(params, radius, [t_max / 2, t_max])
    value = float(curve.upper[1])
    stab = abs(value - float(curve.upper[0]))
    stabilized = stab <= tol
    if not stabilized:
        warnings.warn(
            f"survival not stabilized: |v({t_max:g}) - v({t_max / 2:g})| = {stab:.3g} > {tol:g}",
            RuntimeWarning,
            stacklevel=2,
        )
    return LongTimeLimit(value, float(curve.lower[1]), float(curve.gap[1]), float(t_max),
                         stab, stabilized, tol)
