import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iaware.metrics import OspaParams, cardinality_error, ospa, ospa2

from .oracles import ospa_bruteforce

PARAMS = OspaParams(c=100, p=2, window=5)

points = st.lists(st.tuples(st.floats(0, 200), st.floats(0, 200)), min_size=0, max_size=5)


def test_identical_sets():
    X = [[1, 2], [30, 40], [5, 5]]
    r = ospa(X, X, PARAMS)
    assert (r.total, r.localization, r.cardinality) == (0, 0, 0)


def test_empty_truth_three_estimates():
    r = ospa([], [[1, 1], [2, 2], [3, 3]], PARAMS)
    assert r.total == 100 and r.cardinality == 100 and r.localization == 0
    assert ospa([], [], PARAMS).total == 0


def test_four_by_four_against_permutations():
    rng = np.random.default_rng(0)
    for _ in range(20):
        X, Y = rng.uniform(0, 100, (4, 2)), rng.uniform(0, 100, (4, 2))
        r = ospa(X, Y, PARAMS)
        assert (r.total, r.localization, r.cardinality) == pytest.approx(ospa_bruteforce(X, Y, 100, 2), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(points, points, st.sampled_from([1.0, 2.0, 3.0]), st.sampled_from([10.0, 100.0]))
def test_properties(X, Y, p, c):
    params = OspaParams(c=c, p=p)
    r = ospa(X, Y, params)
    assert (r.total, r.localization, r.cardinality) == pytest.approx(ospa_bruteforce(X, Y, c, p), abs=1e-9)
    assert 0 <= r.total <= c + 1e-9
    # symmetry, and the split of total into its parts
    assert ospa(Y, X, params).total == pytest.approx(r.total, abs=1e-12)
    assert r.total**p == pytest.approx(r.localization**p + r.cardinality**p, rel=1e-9, abs=1e-9)


def test_params_validation():
    for bad in (dict(c=0), dict(p=0.5), dict(window=0)):
        with pytest.raises(ValueError):
            OspaParams(**bad)


def series(d):
    return {label: {k: np.asarray(v, float) for k, v in frames.items()} for label, frames in d.items()}


def test_ospa2_window_one_is_frame_ospa():
    rng = np.random.default_rng(1)
    truth = series({i: {k: rng.uniform(0, 100, 2) for k in range(3)} for i in range(3)})
    est = series({i: {k: rng.uniform(0, 100, 2) for k in range(3) if rng.random() < 0.8} for i in range(4)})
    p1 = OspaParams(c=100, p=2, window=1)
    for k in range(3):
        X = [s[k] for s in truth.values() if k in s]
        Y = [s[k] for s in est.values() if k in s]
        assert ospa2(truth, est, k, p1).total == pytest.approx(ospa(X, Y, p1).total, abs=1e-12)


def test_ospa2_identical_tracks():
    tr = series({"a": {0: [0, 0], 1: [1, 1]}, "b": {1: [5, 5]}})
    r = ospa2(tr, tr, 1, PARAMS)
    assert (r.total, r.localization, r.cardinality) == (0, 0, 0)


def test_ospa2_two_by_two_hand_oracle():
    truth = series({
        "t1": {k: [10.0 * k, 0] for k in range(5)},
        "t2": {k: [10.0 * k, 50] for k in range(2, 5)},
    })
    est = series({
        "e1": {k: [10.0 * k + 3, 4] for k in range(5)},
        "e2": {k: [10.0 * k, 58] for k in range(3, 5)},
    })

    def base(a, b):
        vals = []
        for k in range(5):
            if k in a and k in b:
                vals.append(min(100.0, math.dist(a[k], b[k])))
            elif k in a or k in b:
                vals.append(100.0)
        return sum(vals) / len(vals)

    T, E = [truth["t1"], truth["t2"]], [est["e1"], est["e2"]]
    best = min(sum(base(T[i], E[j]) ** 2 for i, j in enumerate(perm)) for perm in itertools.permutations(range(2)))
    expected = math.sqrt(best / 2)
    r = ospa2(truth, est, 4, PARAMS)
    assert r.total == pytest.approx(expected, abs=1e-12)
    assert r.cardinality == 0


def test_cardinality_error_sign():
    assert cardinality_error(5, 5) == 0
    assert cardinality_error(5, 3) == 2
    assert cardinality_error(3, 5) == -2
    with pytest.raises(ValueError):
        cardinality_error(-1, 0)
