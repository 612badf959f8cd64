import numpy as np
import pytest

from esnena.bifurcation import INDETERMINATE, NOT_APPLICABLE, Map1DParams, count_conditions, fixed_points_1d, \
    fold_curve, nullcline, nullcline_polylines, nullclines_2d
from esnena.exceptions import EsnUsageError


def test_fixed_points_1d_bistable():
    points = fixed_points_1d(Map1DParams(3.0, 0.0))
    assert [stability for _, stability in points] == ["stable", "unstable", "stable"]
    assert points[1][0] == pytest.approx(0.0, abs=1e-10)
    assert points[2][0] == pytest.approx(np.tanh(3.0 * points[2][0]), abs=1e-10)
    assert points[0][0] == pytest.approx(-points[2][0])


def test_fixed_points_1d_monostable():
    points = fixed_points_1d(Map1DParams(0.5, 0.0))
    assert len(points) == 1
    assert points[0][0] == pytest.approx(0.0, abs=1e-10)
    assert points[0][1] == "stable"
    points = fixed_points_1d(Map1DParams(3.0, 2.0))
    assert len(points) == 1
    assert points[0][0] > 0


def test_fixed_points_1d_tangency():
    m = 3.0
    w_plus, _ = fold_curve(m)
    s = np.sqrt((m - 1.0) / m)
    points = fixed_points_1d(Map1DParams(m, w_plus))
    assert len(points) == 2
    assert points[0][0] == pytest.approx(-s)
    assert points[0][1] == "fold"
    assert points[1][1] == "stable"


def test_fold_curve():
    assert fold_curve(1.0) == (0.0, 0.0)
    w_plus, w_minus = fold_curve(3.0)
    assert w_minus == -w_plus
    s = np.sqrt(2.0 / 3.0)
    assert w_plus == pytest.approx(3.0 * s - np.arctanh(s))
    with pytest.raises(EsnUsageError):
        fold_curve(0.5)


def test_fold_curve_partitions_counts():
    for m in np.linspace(1.05, 5.0, 50):
        w_plus, _ = fold_curve(m)
        for w in np.linspace(-3.0, 3.0, 50):
            if abs(abs(w) - w_plus) < 1e-6:
                continue
            expected = 3 if abs(w) < w_plus else 1
            assert len(fixed_points_1d(Map1DParams(m, w))) == expected


def test_nullcline():
    assert nullcline(3.0, 0.6, 0.0) == 0.0
    eta = np.array([-0.5, 0.5])
    np.testing.assert_allclose(nullcline(3.0, 0.6, eta), (-3.0 * eta + np.arctanh(eta)) / 0.6)


def test_nullclines_2d_nine_points():
    result = nullclines_2d(3.0, 0.6, 0.6, 3.0)
    assert result.count == 9
    stabilities = [p.stability for p in result.fixed_points]
    assert stabilities.count("stable") == 4
    assert stabilities.count("saddle(1)") == 4
    assert stabilities.count("repeller") == 1
    for p in result.fixed_points:
        x, y = p.location
        assert x == pytest.approx(np.tanh(3.0 * x + 0.6 * y), abs=1e-9)
        assert y == pytest.approx(np.tanh(0.6 * x + 3.0 * y), abs=1e-9)


def test_nullclines_2d_single_point():
    result = nullclines_2d(0.5, 0.2, -0.2, 0.5)
    assert result.count == 1
    np.testing.assert_allclose(result.fixed_points[0].location, [0.0, 0.0], atol=1e-9)


def test_nullclines_2d_degenerate_coupling():
    result = nullclines_2d(3.0, 0.0, 0.6, 3.0)
    assert result.samples == 0
    assert result.count == 9
    for p in result.fixed_points:
        x, y = p.location
        assert x == pytest.approx(np.tanh(3.0 * x), abs=1e-9)
        assert y == pytest.approx(np.tanh(0.6 * x + 3.0 * y), abs=1e-9)


def test_nullcline_polylines_inside_square():
    first, second = nullcline_polylines(3.0, 0.6, 0.6, 3.0, samples=200)
    assert len(first) > 0 and len(second) > 0
    assert np.all(np.abs(first) < 1.0)
    assert np.all(np.abs(second) < 1.0)


def test_count_conditions_examples():
    assert count_conditions(3.0, 0.6, 0.6, 3.0) == 9
    assert count_conditions(1.1, 4.0, -2.0, 4.0) == 5
    assert count_conditions(3.0, 2.1, 2.1, 3.0) == 3
    assert count_conditions(0.5, 1.0, 1.0, 3.0) == NOT_APPLICABLE
    assert count_conditions(1.5, 0.25, 0.25, 1.5) == INDETERMINATE
    assert count_conditions(1.1, 4.0, -2.0, 4.0) == nullclines_2d(1.1, 4.0, -2.0, 4.0).count


def test_nullclines_2d_counts_near_saturation():
    assert nullclines_2d(4.43, 0.316, 0.032, 3.519).count == 9
    assert nullclines_2d(4.651, 2.1, 0.748, 4.104).count == 9
    assert nullclines_2d(4.253, 0.611, -2.533, 1.517).count == 5


def test_nullclines_2d_small_c():
    result = nullclines_2d(3.0, 0.6, 1e-9, 3.0)
    assert result.count == 9
    for p in result.fixed_points:
        x, y = p.location
        assert y == pytest.approx(np.tanh(1e-9 * x + 3.0 * y), abs=1e-9)


@pytest.mark.slow
def test_count_conditions_agree_with_nullclines():
    rng = np.random.default_rng(0)
    checked = 0
    for a, b, c, d in zip(rng.uniform(1, 5, 1000), rng.uniform(-3, 3, 1000), rng.uniform(-3, 3, 1000),
                          rng.uniform(1, 5, 1000)):
        expected = count_conditions(a, b, c, d)
        if not isinstance(expected, int):
            continue
        checked += 1
        assert nullclines_2d(a, b, c, d).count == expected, (a, b, c, d)
    assert checked > 100
