import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gammaln

from dormantwalk import green
from dormantwalk.model import map_chunks
from dormantwalk import _kernels


def return_probs_d2(n_max):
    """P(X_n = 0) for the planar walk, n = 0..n_max."""
    p = np.zeros(n_max + 1)
    m = np.arange(0, n_max // 2 + 1)
    p[0::2] = np.exp(2 * (gammaln(2 * m + 1) - 2 * gammaln(m + 1) - 2 * m * math.log(2)))
    return p


def return_probs_d3(m_max):
    """P(X_{2m} = 0) for the cubic walk, m = 0..m_max (multinomial sum)."""
    out = np.empty(m_max + 1)
    for m in range(m_max + 1):
        j = np.arange(m + 1)[:, None]
        k = np.arange(m + 1)[None, :]
        mask = j + k <= m
        lt = gammaln(m + 1) - gammaln(j + 1) - gammaln(k + 1) - gammaln(np.maximum(m - j - k, 0) + 1)
        inner = np.exp(2 * lt - 2 * m * math.log(3))[mask].sum()
        out[m] = math.exp(gammaln(2 * m + 1) - 2 * gammaln(m + 1) - 2 * m * math.log(2)) * inner
    return out


# -- structure function ------------------------------------------------------

def test_structure_function_values():
    assert green.structure_function(np.zeros(3)) == 1.0
    assert green.structure_function(np.array([math.pi, math.pi])) == pytest.approx(-1.0)
    assert green.structure_function(np.array([math.pi, 0.0])) == pytest.approx(0.0, abs=1e-15)


# -- resolvent and generating kernels ----------------------------------------

def test_zero_mode_sum():
    lam, R = 1.0, 24
    total = sum(green.green_resolvent(2, (a, b), lam).value
                for a in range(-R, R + 1) for b in range(-R, R + 1))
    assert total == pytest.approx(1 / lam, rel=1e-9)


def test_log_growth_stabilizes():
    offsets = [math.pi * green.green_resolvent(2, (0, 0), lam).value - math.log(1 / lam)
               for lam in (1e-6, 1e-7, 1e-8)]
    assert abs(offsets[1] - offsets[0]) < 0.05 and abs(offsets[2] - offsets[1]) < 0.05
    # the constant is log 8 for this normalization
    assert offsets[-1] == pytest.approx(math.log(8), abs=1e-3)


def test_resolvent_series_oracle():
    lam, n = 1.0, 200
    probs = return_probs_d2(n)
    series = float(np.sum(probs * (1 / (1 + lam)) ** (np.arange(n + 1) + 1)))
    tail = (1 / (1 + lam)) ** (n + 2) / (1 - 1 / (1 + lam))
    value = green.green_resolvent(2, (0, 0), lam)
    assert abs(value.value - series) <= tail + 1e-12
    assert value.est_error < 1e-9


@pytest.mark.parametrize("d", [1, 2, 3])
def test_bessel_and_brillouin_agree(d):
    for x in [(0,) * d, (1,) + (0,) * (d - 1), tuple(range(1, d + 1))]:
        a = green.green_resolvent(d, x, 0.3, method="bessel").value
        b = green.green_resolvent(d, x, 0.3, method="brillouin").value
        assert a == pytest.approx(b, rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(d=st.integers(1, 3), s=st.floats(0.1, 0.9), data=st.data())
def test_convention_bridge(d, s, data):
    x = tuple(data.draw(st.lists(st.integers(-3, 3), min_size=d, max_size=d)))
    gen = green.green_generating(d, x, s).value
    res = green.green_resolvent(d, x, (1 - s) / s).value
    assert gen == pytest.approx(res / s, rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(d=st.integers(1, 3), data=st.data())
def test_symmetry(d, data):
    x = data.draw(st.lists(st.integers(-3, 3), min_size=d, max_size=d))
    perm = data.draw(st.permutations(x))
    signs = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=d, max_size=d))
    y = tuple(s * v for s, v in zip(signs, perm))
    a = green.green_resolvent(d, tuple(x), 0.05).value
    b = green.green_resolvent(d, y, 0.05).value
    assert a == pytest.approx(b, rel=1e-10)


def test_generating_endpoints():
    assert green.green_generating(2, (0, 0), 0.0).value == 1.0
    assert green.green_generating(2, (1, 0), 0.0).value == 0.0
    assert math.isinf(green.green_generating(2, (0, 0), 1.0).value)
    assert green.green_generating(3, (0, 0, 0), 1.0).value == pytest.approx(1.516386059, rel=1e-9)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        green.green_resolvent(2, (0, 0), 0.0)
    with pytest.raises(ValueError):
        green.green_generating(2, (0, 0), 1.5)
    with pytest.raises(ValueError):
        green.green_d3((0, 0))


# -- potential kernel --------------------------------------------------------

def test_potential_kernel_anchors():
    assert green.potential_kernel((0, 0)).value == 0.0
    assert green.potential_kernel((1, 0)).value == pytest.approx(1.0, abs=1e-12)
    # classical closed forms a(1,1) = 4/pi and a(2,0) = 4 - 8/pi
    assert green.potential_kernel((1, 1)).value == pytest.approx(4 / math.pi, abs=1e-12)
    assert green.potential_kernel((2, 0)).value == pytest.approx(4 - 8 / math.pi, abs=1e-12)


def test_potential_kernel_harmonic_at_e1():
    a = lambda x: green.potential_kernel(x).value  # noqa: E731
    assert 4 * a((1, 0)) == pytest.approx(a((0, 0)) + a((2, 0)) + 2 * a((1, 1)), abs=1e-11)


@pytest.mark.parametrize("x", [(2, 1), (3, 0), (4, -2), (5, 5)])
def test_potential_kernel_harmonic_off_origin(x):
    a = lambda v: green.potential_kernel(v).value  # noqa: E731
    nb = [(x[0] + 1, x[1]), (x[0] - 1, x[1]), (x[0], x[1] + 1), (x[0], x[1] - 1)]
    assert a(x) == pytest.approx(sum(a(v) for v in nb) / 4, abs=1e-10)


# -- error kernel ------------------------------------------------------------

def test_error_kernel():
    assert green.error_kernel((0, 0), 1e-3) == 0.0
    e4, e6 = green.error_kernel((1, 0), 1e-4), green.error_kernel((1, 0), 1e-6)
    assert abs(e6) < abs(e4)
    assert e4 <= 0 and e6 <= 0


def test_error_kernel_definition():
    # E(x, lam) = a-type difference of resolvent values minus a(x)
    lam, x = 1e-3, (2, 1)
    r0 = green.green_resolvent(2, (0, 0), lam).value
    rx = green.green_resolvent(2, x, lam).value
    assert green.error_kernel(x, lam) == pytest.approx(
        (r0 - rx) - green.potential_kernel(x).value, abs=1e-9)


def test_error_kernel_bound():
    # |E| <= C (lam (1 - cos delta)^-2 + delta^2 |x|^2) with a fitted C
    delta = 0.5
    pts = [(x, lam) for x in [(1, 0), (2, 1), (3, 3)] for lam in (1e-2, 1e-3, 1e-4, 1e-5)]
    ratios = [abs(green.error_kernel(x, lam))
              / (lam / (1 - math.cos(delta)) ** 2 + delta ** 2 * (x[0] ** 2 + x[1] ** 2))
              for x, lam in pts]
    assert max(ratios) < 1.0


# -- transient Green function ------------------------------------------------

def test_green_d3_series_oracle():
    m_max = 500
    probs = return_probs_d3(m_max)

    def estimate(m):
        # P_{2m}(0) ~ c m^{-3/2}; partial sum plus the integrated tail
        c = probs[m] * m ** 1.5
        return probs[: m + 1].sum() + c * (2 / math.sqrt(m) - 1 / m ** 1.5)

    # the remaining error is O(m^{-3/2}); Richardson on m and m/2
    m1, m2 = m_max // 2, m_max
    e1, e2 = estimate(m1), estimate(m2)
    oracle = (e2 * m2 ** 1.5 - e1 * m1 ** 1.5) / (m2 ** 1.5 - m1 ** 1.5)
    value = green.green_d3((0, 0, 0))
    assert value == pytest.approx(1.516386, abs=1e-6)
    assert value == pytest.approx(oracle, abs=2e-6)


def test_green_d3_return_probability():
    g0 = green.green_d3((0, 0, 0))
    assert green.green_d3((1, 0, 0)) / g0 == pytest.approx(0.340537, abs=1e-6)
    # last-exit identity G(0) = 1 + G(e1)
    assert g0 == pytest.approx(1 + green.green_d3((1, 0, 0)), abs=1e-10)


def test_green_d3_decays_along_axis():
    vals = [green.green_d3((n, 0, 0)) for n in range(8)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_green_d3_normalizations():
    for d in (3, 4):
        x = (0,) * d
        assert green.green_d3(x, "occupation") == pytest.approx(green.green_d3(x) / (2 * d))


# -- hitting transform -------------------------------------------------------

def test_hitting_transform_values():
    assert green.hitting_transform_1d(2.0, 0.0) == 1.0
    assert green.hitting_transform_1d(2.0, 0.01) == pytest.approx(0.931745, abs=1e-6)
    lam = 1e-6
    assert green.hitting_transform_1d(1.0, lam) == pytest.approx(1 - math.sqrt(lam), abs=2 * lam)


def test_hitting_transform_convolution():
    # solve (lam + 2 nu) f(x) = nu (f(x-1) + f(x+1)) on [0, N] with f(0)=1, f(N)=0
    from scipy.linalg import solve_banded

    nu, lam, N = 2.0, 0.05, 400
    n = N - 1
    ab = np.zeros((3, n))
    ab[0, 1:] = -nu
    ab[1, :] = lam + 2 * nu
    ab[2, :-1] = -nu
    rhs = np.zeros(n)
    rhs[0] = nu
    f = solve_banded((1, 1), ab, rhs)
    f1 = green.hitting_transform_1d(nu, lam)
    assert f[0] == pytest.approx(f1, rel=1e-12)
    assert f[1] == pytest.approx(f1 ** 2, rel=1e-12)


def test_hitting_transform_mc():
    nu, lam = 2.0, 0.01

    def work(rng, size):
        v = np.empty(size)
        _kernels.first_passage_1d(nu, 1e4, rng, v)
        return v

    t = np.concatenate(map_chunks(work, 5, 10**5))
    w = np.exp(-lam * t)
    se = w.std(ddof=1) / math.sqrt(w.size)
    assert abs(w.mean() - green.hitting_transform_1d(nu, lam)) <= 3 * se


def test_first_visit_decomposition():
    from dormantwalk.acceptance import _path_count_avoiding

    s, n_max = 0.25, 16
    tail = s ** (n_max + 1) / (1 - s)
    g = lambda v: green.green_generating(2, v, s).value  # noqa: E731
    for x, y in itertools.product([(1, 0), (2, 2)], [(0, 1), (-1, 2)]):
        direct = float(np.polyval(_path_count_avoiding(x, y, n_max)[::-1], s))
        formula = g((y[0] - x[0], y[1] - x[1])) - g(x) * g(y) / g((0, 0))
        assert abs(formula - direct) <= tail + 1e-10
