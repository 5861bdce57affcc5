"""Compiled and fallback kernels must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treebound import _pykernels as ref
from treebound.topology import nested_sets_from_depths

ckernels = pytest.importorskip("treebound._ckernels")

unit = st.floats(0, 1)


def test_splitmix_reference_vectors():
    state, outs = 0, []
    for _ in range(3):
        state, z = ref.splitmix64(state)
        outs.append(z)
    assert outs == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    assert ref.splitmix64(1234567)[1] == 6457827717110365317


@given(st.integers(1, 60), unit, unit, st.floats(0, 1.5))
def test_charpoly(T, a, b, s):
    b = min(b, 1 - a)
    assert ckernels.charpoly_eval(T, a, b, s) == ref.charpoly_eval(T, a, b, s)
    assert ckernels.charpoly_recursive(T, a, b, s) == ref.charpoly_recursive(T, a, b, s)


@given(st.integers(1, 3000), st.floats(1e-6, 1), unit, st.floats(0, 1))
def test_scaled_charpoly(T, a, b, s):
    b = min(b, 1 - a)
    got = ckernels.charpoly_scaled(T, a, b, s)
    assert got == ref.charpoly_scaled(T, a, b, s)
    if T <= 30:
        # same sign as the unscaled polynomial wherever that is resolved
        raw = ref.charpoly_eval(T, a, b, s)
        if abs(raw) > 1e-12:
            assert (got > 0) == (raw > 0)


@given(st.integers(2, 40), st.floats(1e-6, 1), unit)
def test_bisection(T, a, b):
    b = min(b, 1 - a)
    lo = max(1 - a, b)
    assert ckernels.bisect_root(T, a, b, lo, 1.0, 1e-12, 200) == \
        ref.bisect_root(T, a, b, lo, 1.0, 1e-12, 200)


@given(st.integers(1, 8).flatmap(
    lambda n: st.lists(unit, min_size=n * n, max_size=n * n)))
def test_power_iteration(vals):
    n = int(round(len(vals) ** 0.5))
    M = np.array(vals).reshape(n, n)
    c = ckernels.power_iteration(M, 1e-10, 2000)
    r = ref.power_iteration(M, 1e-10, 2000)
    assert c[1:3] == r[1:3]
    assert c[0] == r[0] or (np.isnan(c[0]) and np.isnan(r[0]))


LEVELS = [[0, 1, 2, 3, 3], [0, 1, 1, 1], [0, 2, 1, 3, 1, 2, 2, 3], [0]]


@settings(max_examples=40)
@given(st.sampled_from(LEVELS), unit, unit, unit, st.booleans(), st.integers(0, 2**64 - 1))
def test_fill_system_matrix(lv, a, b, g, slack, seed):
    g = min(g, 1 - b)
    depth, order, starts = nested_sets_from_depths(lv).index_arrays()
    n = len(lv)
    A1, A2 = np.zeros((n, n)), np.zeros((n, n))
    s1 = ckernels.fill_system_matrix(A1, depth, order, starts, a, b, g, slack, seed)
    s2 = ref.fill_system_matrix(A2, depth, order, starts, a, b, g, slack, seed)
    assert s1 == s2
    np.testing.assert_array_equal(A1, A2)


@pytest.mark.parametrize("slack", [False, True])
@pytest.mark.parametrize("lv", LEVELS[:3])
def test_simulate(lv, slack):
    depth, order, starts = nested_sets_from_depths(lv).index_arrays()
    x0 = np.linspace(0, 1, len(lv))
    args = (depth, order, starts, 0.3, 0.2, 0.4, slack, 99, x0, 300)
    c, r = ckernels.simulate(*args), ref.simulate(*args)
    np.testing.assert_array_equal(c[0], r[0])
    np.testing.assert_array_equal(c[1], r[1])
    assert c[2] == r[2]


def test_diameters_agree_with_selected_backend():
    from treebound._backend import BACKEND, kernels
    assert (BACKEND == "cython") == (kernels is ckernels)
