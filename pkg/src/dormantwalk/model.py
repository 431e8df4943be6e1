"""Event-driven sampling of the pair process (Z, alpha).

The walker/trap pair is simulated through the relative position
``Z = X - Y`` and the walker's activity flag.  Two samplers are provided:

* :func:`simulate_path` is a plain competing-clocks (Gillespie) loop driven
  by :func:`transition_rates`; it is slow but obviously faithful and serves
  as the reference.
* :func:`estimate_survival`, :func:`simulate_exposures` and the ``Z1``
  samplers run compiled kernels over many paths at once.

Random streams: a master seed is expanded with :class:`numpy.random.SeedSequence`
into one independent Philox stream per chunk of :data:`CHUNK` paths.  Chunks
are processed by a thread pool (size from ``DORMANTWALK_THREADS``) and their
sufficient statistics are merged in chunk order, so results depend on the
seed only, never on the thread count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
import os

import numpy as np

from . import _kernels
from .params import InvalidParameterError, ModelParams, PairState

__all__ = [
    "CHUNK",
    "DEFAULT_Z1_HORIZON",
    "TrajectoryOutcome",
    "RegenerationSample",
    "Z1Batch",
    "SufficientStats",
    "SurvivalEstimate",
    "transition_rates",
    "simulate_path",
    "sample_Z1",
    "sample_Z1_batch",
    "sample_Z1_decomposition",
    "simulate_exposures",
    "estimate_survival",
    "chunk_streams",
    "map_chunks",
    "thread_count",
]

CHUNK = 1 << 14
DEFAULT_Z1_HORIZON = 1e4


@dataclass(frozen=True)
class TrajectoryOutcome:
    """Result of one path up to ``horizon`` (or up to killing)."""

    exposure: float
    survived: bool | None
    final_state: PairState
    horizon: float
    n_events: int = 0


@dataclass(frozen=True)
class RegenerationSample:
    """One return time to (0, active), censored at the sampling horizon."""

    value: float
    censored: bool


@dataclass(frozen=True)
class Z1Batch:
    value: np.ndarray
    censored: np.ndarray
    horizon: float
    seed: int | None = None
    first_hold: np.ndarray | None = None

    def __len__(self):
        return self.value.size

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean())

    def laplace(self, lam):
        """Mean and standard error of ``exp(-lam Z1)``, censored values as zero weight.

        A censored sample contributes ``exp(-lam * horizon)`` at most; this
        bound is returned as the third element.
        """
        w = np.where(self.censored, 0.0, np.exp(-lam * self.value))
        n = w.size
        return float(w.mean()), float(w.std(ddof=1) / math.sqrt(n)), float(
            self.censored.mean() * math.exp(-lam * self.horizon)
        )


class SufficientStats:
    """Count, sum and sum of squares per column; mergeable."""

    __slots__ = ("n", "s1", "s2")

    def __init__(self, n=0, s1=0.0, s2=0.0):
        self.n = n
        self.s1 = np.asarray(s1, dtype=float)
        self.s2 = np.asarray(s2, dtype=float)

    @classmethod
    def of(cls, values):
        values = np.asarray(values, dtype=float)
        return cls(values.shape[0], values.sum(axis=0), (values * values).sum(axis=0))

    def merge(self, other: "SufficientStats") -> "SufficientStats":
        return SufficientStats(self.n + other.n, self.s1 + other.s1, self.s2 + other.s2)

    @property
    def mean(self):
        return self.s1 / self.n

    @property
    def stderr(self):
        if self.n < 2:
            return np.full_like(self.s1, np.inf)
        var = (self.s2 - self.s1 * self.s1 / self.n) / (self.n - 1)
        return np.sqrt(np.maximum(var, 0.0) / self.n)


@dataclass(frozen=True)
class SurvivalEstimate:
    """Monte Carlo estimate of ``<U(t)>`` at one time."""

    time: float
    mean: float
    stderr: float
    n_paths: int
    seed: int
    estimator: str
    gamma: float


def thread_count() -> int:
    env = os.environ.get("DORMANTWALK_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InvalidParameterError(f"DORMANTWALK_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise InvalidParameterError(f"DORMANTWALK_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise InvalidParameterError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def chunk_streams(seed, n_items, chunk=CHUNK):
    """Independent Philox generators, one per chunk of at most ``chunk`` items."""
    seed = _check_seed(seed)
    n_chunks = max(1, -(-int(n_items) // chunk))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [chunk] * (n_chunks - 1) + [int(n_items) - chunk * (n_chunks - 1)]
    return [(np.random.Generator(np.random.Philox(c)), s) for c, s in zip(children, sizes)]


def map_chunks(func, seed, n_items, chunk=CHUNK, threads=None):
    """Apply ``func(rng, size)`` to every chunk; results come back in chunk order."""
    streams = chunk_streams(seed, n_items, chunk)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(streams) == 1:
        return [func(rng, size) for rng, size in streams]
    with ThreadPoolExecutor(max_workers=min(threads, len(streams))) as pool:
        return list(pool.map(lambda item: func(*item), streams))


def _check_state(params: ModelParams, state: PairState):
    if state.d != params.d:
        raise InvalidParameterError(
            f"state has dimension {state.d} but params.d = {params.d}"
        )


def transition_rates(params: ModelParams, state: PairState):
    """All enabled transitions out of ``state`` as ``(target, rate)`` pairs.

    Killing is not a transition of the pair process and is not listed.
    """
    _check_state(params, state)
    rate = state.alpha * params.kappa + params.rho
    out = []
    if rate > 0:
        for j in range(params.d):
            for step in (1, -1):
                z = list(state.z)
                z[j] += step
                out.append((PairState(tuple(z), state.alpha), rate))
    if state.at_origin and state.alpha == 1 and params.s1 > 0:
        out.append((PairState(state.z, 0), params.s1))
    elif not state.at_origin and state.alpha == 0:
        out.append((PairState(state.z, 1), params.s0))
    return out


def simulate_path(params: ModelParams, start: PairState, horizon: float, rng,
                  hard_kill=False) -> TrajectoryOutcome:
    """Sample one path event by event up to ``horizon``.

    Accumulates the exposure (time spent in (0, active)).  With
    ``hard_kill`` a killing clock of rate ``gamma`` competes with the
    other clocks while in (0, active) and ``survived`` is reported.
    """
    _check_state(params, start)
    if horizon < 0:
        raise InvalidParameterError(f"horizon must be >= 0, got {horizon}")
    state = start
    t = 0.0
    exposure = 0.0
    n_events = 0
    while True:
        moves = transition_rates(params, state)
        exposed = state.at_origin and state.alpha == 1
        kill = params.gamma if (hard_kill and exposed) else 0.0
        total = sum(r for _, r in moves) + kill
        h = rng.exponential(1.0 / total) if total > 0 else math.inf
        if t + h >= horizon:
            if exposed:
                exposure += horizon - t
            return TrajectoryOutcome(exposure, True if hard_kill else None, state, horizon,
                                     n_events)
        t += h
        if exposed:
            exposure += h
        u = rng.random() * total
        n_events += 1
        if u >= total - kill:
            return TrajectoryOutcome(exposure, False, state, horizon, n_events)
        for target, rate in moves:
            u -= rate
            if u < 0:
                state = target
                break
        else:
            state = moves[-1][0]


def _rates(params):
    return (params.d, params.kappa, params.rho, params.s0, params.s1)


def sample_Z1(params: ModelParams, horizon: float, rng) -> RegenerationSample:
    """One return time to (0, active) started there, censored at ``horizon``."""
    if not horizon > 0:
        raise InvalidParameterError(f"horizon must be > 0, got {horizon}")
    value = np.empty(1)
    censored = np.empty(1, dtype=np.bool_)
    hold = np.empty(1)
    _kernels.regeneration_times(*_rates(params), float(horizon), rng, value, censored, hold)
    return RegenerationSample(float(value[0]), bool(censored[0]))


def sample_Z1_batch(params: ModelParams, n: int, seed: int,
                    horizon: float = DEFAULT_Z1_HORIZON) -> Z1Batch:
    """``n`` censored return times drawn from the raw pair process."""
    if not horizon > 0:
        raise InvalidParameterError(f"horizon must be > 0, got {horizon}")

    def work(rng, size):
        value = np.empty(size)
        censored = np.empty(size, dtype=np.bool_)
        hold = np.empty(size)
        _kernels.regeneration_times(*_rates(params), float(horizon), rng, value, censored, hold)
        return value, censored, hold

    parts = map_chunks(work, seed, n)
    return Z1Batch(
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        float(horizon),
        seed,
        np.concatenate([p[2] for p in parts]),
    )


def sample_Z1_decomposition(params: ModelParams, n: int, seed: int,
                            horizon: float = DEFAULT_Z1_HORIZON) -> Z1Batch:
    """Return times in d = 1 built from the branch decomposition.

    The active branch adds a first passage from distance 1; the dormant
    branch adds geometric many dormant excursions and then ``|Y|``
    independent first passages from distance 1.
    """
    if params.d != 1:
        raise InvalidParameterError("the decomposition sampler is implemented for d = 1")

    def work(rng, size):
        value = np.empty(size)
        censored = np.empty(size, dtype=np.bool_)
        _kernels.regeneration_by_decomposition_1d(
            params.kappa, params.rho, params.s0, params.s1, float(horizon), rng, value, censored
        )
        return value, censored

    parts = map_chunks(work, seed, n)
    return Z1Batch(np.concatenate([p[0] for p in parts]),
                   np.concatenate([p[1] for p in parts]), float(horizon), seed)


def _times(times):
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise InvalidParameterError("the time grid is empty")
    if np.any(~np.isfinite(times)) or np.any(times < 0):
        raise InvalidParameterError("times must be finite and non-negative")
    if np.any(np.diff(times) < 0):
        raise InvalidParameterError("times must be sorted ascending")
    return times


def _start(params, start):
    start = PairState.origin(params.d) if start is None else start
    _check_state(params, start)
    return np.asarray(start.z, dtype=np.int64), start.alpha


def _run_exposure(params, times, rng, size, z0, alpha0, hard_kill):
    exposure = np.empty((size, times.size))
    kill_time = np.empty(size)
    _kernels.exposure_paths(params.d, params.kappa, params.rho, params.s0, params.s1,
                            params.gamma, hard_kill, z0, alpha0, times, rng, exposure,
                            kill_time)
    return exposure, kill_time


def simulate_exposures(params: ModelParams, times, n_paths: int, seed: int,
                       start: PairState | None = None) -> np.ndarray:
    """Exposure ``L_t`` of ``n_paths`` paths at every grid time, shape (n_paths, len(times))."""
    times = _times(times)
    z0, a0 = _start(params, start)
    parts = map_chunks(lambda rng, size: _run_exposure(params, times, rng, size, z0, a0,
                                                       False)[0], seed, n_paths)
    return np.concatenate(parts, axis=0)


def estimate_survival(params: ModelParams, times, n_paths: int, seed: int,
                      estimator="exposure", start: PairState | None = None):
    """Monte Carlo ``<U(t)>`` on a time grid.

    ``estimator="exposure"`` averages ``exp(-gamma L_t)``;
    ``estimator="hard_kill"`` runs a killing clock and averages the
    survival indicator.  Returns one :class:`SurvivalEstimate` per time.
    """
    if estimator not in ("exposure", "hard_kill"):
        raise InvalidParameterError(
            f"estimator must be 'exposure' or 'hard_kill', got {estimator!r}"
        )
    if isinstance(n_paths, bool) or int(n_paths) != n_paths or n_paths < 1:
        raise InvalidParameterError(f"n_paths must be a positive integer, got {n_paths!r}")
    seed = _check_seed(seed)
    times = _times(times)
    z0, a0 = _start(params, start)
    hard = estimator == "hard_kill"

    def work(rng, size):
        exposure, kill_time = _run_exposure(params, times, rng, size, z0, a0, hard)
        if hard:
            w = (kill_time[:, None] > times[None, :]).astype(float)
        else:
            w = np.exp(-params.gamma * exposure)
        return SufficientStats.of(w)

    stats = SufficientStats()
    for part in map_chunks(work, seed, int(n_paths)):
        stats = stats.merge(part)
    mean, se = stats.mean, stats.stderr
    return [
        SurvivalEstimate(float(t), float(m), float(s), int(stats.n), seed, estimator,
                         params.gamma)
        for t, m, s in zip(times, mean, se)
    ]
