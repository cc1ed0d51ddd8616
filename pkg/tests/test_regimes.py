import math

import pytest

from cwpotts import lines as L
from cwpotts import regimes as R
from cwpotts.bifurcation import ParameterError


@pytest.mark.parametrize(
    "beta, name",
    [(2.4, "I"), (2.55, "II.i"), (2.63, "II.ii"), (2.669, "II.iii"), (2.7, "II.iv"), (2.75, "II.iv"), (2.9, "III")],
)
def test_regime_boundaries(beta, name):
    assert R.regime(beta) == name


def test_regime_domain():
    for bad in (0.0, 3.0, -1.0):
        with pytest.raises(ParameterError):
            R.regime(bad)


def test_expected_label_sequences():
    assert R.expected_labels("I") == ["empty"]
    assert R.expected_labels("III")[-1] == "star"
    assert R.expected_labels("II.iii")[-2:] == ["three-arcs", "empty"]
    assert R.expected_labels("II.iv")[3] == "triangle-plus-lines"


def test_predicted_transitions_are_ordered():
    for beta in (2.55, 2.63, 2.7, 2.9):
        times = [t for _, t, _ in R.predicted_transitions(beta)]
        assert times == sorted(times)


def test_default_grid_brackets_predictions():
    grid = R.default_t_grid(2.72)
    times = [t for _, t, _ in R.predicted_transitions(2.72)]
    assert grid[0] < min(times) and grid[-1] > max(times)
    assert len(grid) == 40
    assert math.isclose(grid[1] / grid[0], grid[2] / grid[1])


def test_classify_short_sweep():
    c = R.classify(2.55, t_grid=[0.3, 0.55, 1.0], resolution=80, check_doubling=False)
    assert c.labels == ["empty", "three-lines", "empty"]
    assert c.sequence_ok


def test_classify_rejects_bad_grid():
    with pytest.raises(ParameterError):
        R.classify(2.55, t_grid=[0.5, 0.4], resolution=40)


def test_regime_schedule_uses_computed_beta_star():
    bs = L.beta_star()
    assert R.regime(bs - 1e-4) == "II.iii" and R.regime(bs + 1e-4) == "II.iv"
