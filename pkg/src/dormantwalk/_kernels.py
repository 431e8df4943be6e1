"""Compiled samplers for the pair process (Z, alpha).

Holding times are exponential and every jump is resolved exactly.  While
the walker is active and away from the trap the embedded chain is a plain
simple random walk with constant total rate ``2d(kappa + rho)``, so the
steps of such a stretch are drawn from a bit buffer and the elapsed time of
``n`` steps is drawn in one go as ``Gamma(n, 1/rate)``.  That is the same
law as summing ``n`` exponential holding times.
"""
from __future__ import annotations

import numba as nb
import numpy as np

_BLOCK = 1024
_BITS_PER_DRAW = 52
_TWO52 = float(2**52)


@nb.njit(nogil=True, cache=True)
def _direction(d, buf, rng):
    # uniform index in [0, 2d) from buffered random bits; buf = [bits, count]
    m = 2 * d
    b = 1
    while (1 << b) < m:
        b += 1
    while True:
        if buf[1] < b:
            buf[0] = np.int64(rng.random() * _TWO52)
            buf[1] = _BITS_PER_DRAW
        k = buf[0] & ((1 << b) - 1)
        buf[0] >>= b
        buf[1] -= b
        if k < m:
            return k


@nb.njit(nogil=True, cache=True)
def _step(z, norm1, k):
    j = k >> 1
    old = abs(z[j])
    if k & 1:
        z[j] += 1
    else:
        z[j] -= 1
    return norm1 + abs(z[j]) - old


@nb.njit(nogil=True, cache=True)
def _active_stretch(z, norm1, d, rate, t, t_end, rng, buf):
    """Run the active walk from z != 0 until it hits 0 or time passes t_end.

    Returns ``(t, norm1, hit)``; on ``hit`` the walk sits at 0 at time t.
    """
    while True:
        n = 0
        while n < _BLOCK:
            norm1 = _step(z, norm1, _direction(d, buf, rng))
            n += 1
            if norm1 == 0:
                break
        t += rng.gamma(n, 1.0 / rate)
        if t >= t_end:
            return t, norm1, False
        if norm1 == 0:
            return t, norm1, True


@nb.njit(nogil=True, cache=True)
def exposure_paths(d, kappa, rho, s0, s1, gamma, hard_kill, z0, alpha0, times, rng,
                   exposure, kill_time):
    """Exposure ``L_t`` at every grid time for ``exposure.shape[0]`` paths.

    In hard-kill mode a killing clock of rate ``gamma`` runs while in
    (0, active); the kill time is stored and the path stops there.
    """
    n_paths = exposure.shape[0]
    ng = times.shape[0]
    t_end = times[ng - 1]
    nu = kappa + rho
    rate_active = 2 * d * nu
    rate_trap = 2 * d * rho
    buf = np.zeros(2, dtype=np.int64)
    z = np.empty(d, dtype=np.int64)
    for i in range(n_paths):
        for j in range(d):
            z[j] = z0[j]
        norm1 = 0
        for j in range(d):
            norm1 += abs(z[j])
        alpha = alpha0
        t = 0.0
        L = 0.0
        gi = 0
        kill_time[i] = np.inf
        while gi < ng and times[gi] <= 0.0:
            exposure[i, gi] = 0.0
            gi += 1
        while t < t_end:
            if alpha == 1 and norm1 == 0:
                total = rate_active + s1
                if hard_kill:
                    total += gamma
                h = rng.standard_exponential() / total
                t_new = t + h
                while gi < ng and times[gi] <= t_new:
                    exposure[i, gi] = L + (times[gi] - t)
                    gi += 1
                L += h
                t = t_new
                if t >= t_end:
                    break
                u = rng.random() * total
                if u < rate_active:
                    norm1 = _step(z, norm1, _direction(d, buf, rng))
                elif u < rate_active + s1:
                    alpha = 0
                else:
                    kill_time[i] = t
                    while gi < ng:
                        exposure[i, gi] = L
                        gi += 1
                    break
            elif alpha == 1:
                t_new, norm1, hit = _active_stretch(z, norm1, d, rate_active, t, t_end, rng, buf)
                while gi < ng and times[gi] <= t_new:
                    exposure[i, gi] = L
                    gi += 1
                t = t_new
            elif norm1 == 0:
                t_new = t + rng.standard_exponential() / rate_trap
                while gi < ng and times[gi] <= t_new:
                    exposure[i, gi] = L
                    gi += 1
                t = t_new
                norm1 = _step(z, norm1, _direction(d, buf, rng))
            else:
                total = rate_trap + s0
                t_new = t + rng.standard_exponential() / total
                while gi < ng and times[gi] <= t_new:
                    exposure[i, gi] = L
                    gi += 1
                t = t_new
                if rng.random() * total < s0:
                    alpha = 1
                else:
                    norm1 = _step(z, norm1, _direction(d, buf, rng))
        while gi < ng:
            exposure[i, gi] = L
            gi += 1


@nb.njit(nogil=True, cache=True)
def regeneration_times(d, kappa, rho, s0, s1, horizon, rng, value, censored, first_hold):
    """Samples of the return time to (0, active), censored at ``horizon``."""
    nu = kappa + rho
    rate_active = 2 * d * nu
    rate_trap = 2 * d * rho
    buf = np.zeros(2, dtype=np.int64)
    z = np.zeros(d, dtype=np.int64)
    for i in range(value.shape[0]):
        for j in range(d):
            z[j] = 0
        norm1 = 0
        h = rng.standard_exponential() / (rate_active + s1)
        first_hold[i] = h
        t = h
        if rng.random() * (rate_active + s1) < rate_active:
            alpha = 1
            norm1 = _step(z, norm1, _direction(d, buf, rng))
        else:
            alpha = 0
        done = False
        while t < horizon:
            if alpha == 1:
                t, norm1, hit = _active_stretch(z, norm1, d, rate_active, t, horizon, rng, buf)
                if hit:
                    done = True
                    break
            elif norm1 == 0:
                t += rng.standard_exponential() / rate_trap
                norm1 = _step(z, norm1, _direction(d, buf, rng))
            else:
                total = rate_trap + s0
                t += rng.standard_exponential() / total
                if rng.random() * total < s0:
                    alpha = 1
                else:
                    norm1 = _step(z, norm1, _direction(d, buf, rng))
        if done and t <= horizon:
            value[i] = t
            censored[i] = False
        else:
            value[i] = horizon
            censored[i] = True


@nb.njit(nogil=True, cache=True)
def _passage_1d(rate, t_cap, rng, buf):
    # first passage 1 -> 0 of the rate-`rate` walk on Z, capped at t_cap
    z = np.ones(1, dtype=np.int64)
    t, norm1, hit = _active_stretch(z, 1, 1, rate, 0.0, t_cap, rng, buf)
    return t


@nb.njit(nogil=True, cache=True)
def regeneration_by_decomposition_1d(kappa, rho, s0, s1, horizon, rng, value, censored):
    """Return times in d = 1 assembled from independent pieces.

    Active branch: holding time plus a first passage from 1.  Dormant
    branch: holding time, then dormant excursions (each a trap move off the
    origin followed by a walk raced against a fresh wake-up clock) until
    the clock wins at some ``Y``, then a sum of ``|Y|`` independent first
    passages from 1.
    """
    nu = kappa + rho
    rate_active = 2 * nu
    rate_trap = 2 * rho
    buf = np.zeros(2, dtype=np.int64)
    for i in range(value.shape[0]):
        t = rng.standard_exponential() / (rate_active + s1)
        if rng.random() * (rate_active + s1) < rate_active:
            t += _passage_1d(rate_active, horizon - t + 1.0, rng, buf)
        else:
            y = 0
            while t < horizon:
                t += rng.standard_exponential() / rate_trap
                wake = rng.standard_exponential() / s0
                pos = 1
                clock = 0.0
                while True:
                    dt = rng.standard_exponential() / rate_trap
                    if clock + dt > wake:
                        break
                    clock += dt
                    pos += 1 if rng.random() < 0.5 else -1
                    if pos == 0:
                        break
                if pos == 0:
                    t += clock
                else:
                    t += wake
                    y = abs(pos)
                    break
            for _ in range(y):
                if t >= horizon:
                    break
                t += _passage_1d(rate_active, horizon - t + 1.0, rng, buf)
        if t <= horizon:
            value[i] = t
            censored[i] = False
        else:
            value[i] = horizon
            censored[i] = True


@nb.njit(nogil=True, cache=True)
def clock_trials(d, q, rng, hit, final):
    """Discrete walk from e1 with a geometric clock of continuation ``q``.

    ``hit[i]`` is set when the walk reaches 0 before the clock fires;
    otherwise ``final[i]`` holds the position when it fires.
    """
    buf = np.zeros(2, dtype=np.int64)
    z = np.zeros(d, dtype=np.int64)
    for i in range(hit.shape[0]):
        for j in range(d):
            z[j] = 0
        z[0] = 1
        norm1 = 1
        hit[i] = False
        while rng.random() < q:
            norm1 = _step(z, norm1, _direction(d, buf, rng))
            if norm1 == 0:
                hit[i] = True
                break
        for j in range(d):
            final[i, j] = z[j]


@nb.njit(nogil=True, cache=True)
def stopped_walk(d, n_steps, rng, final):
    """Discrete walk from e1 stopped at 0 or after ``n_steps`` steps."""
    buf = np.zeros(2, dtype=np.int64)
    z = np.zeros(d, dtype=np.int64)
    for i in range(final.shape[0]):
        for j in range(d):
            z[j] = 0
        z[0] = 1
        norm1 = 1
        for _ in range(n_steps):
            norm1 = _step(z, norm1, _direction(d, buf, rng))
            if norm1 == 0:
                break
        for j in range(d):
            final[i, j] = z[j]


@nb.njit(nogil=True, cache=True)
def first_passage_1d(nu, horizon, rng, value):
    """First passage 1 -> 0 of the rate-``2 nu`` walk, capped at ``horizon``."""
    buf = np.zeros(2, dtype=np.int64)
    for i in range(value.shape[0]):
        value[i] = min(_passage_1d(2 * nu, horizon, rng, buf), horizon)

