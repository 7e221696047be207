"""Sweep shapes and golden-file stability."""

from pathlib import Path

import numpy as np
import pytest

from microforge.config import default_config
from microforge.errors import GridError
from microforge.sweeps import (
    bilayer_ratio,
    cycle_repeat,
    run_sweep,
    swell_curve,
    transition_curve,
)

GOLDEN = Path(__file__).parent / "golden"


def test_swell_curve_endpoints_and_interior_peak():
    rows = swell_curve(default_config())[1:]
    phis = [r[0] for r in rows]
    lams = [r[1] for r in rows]
    assert lams[phis.index(0.0)] == pytest.approx(0.927, abs=1e-9)
    assert lams[phis.index(1.0)] == pytest.approx(0.753, abs=1e-9)
    k = int(np.argmax(lams))
    assert phis[k] == pytest.approx(0.40, abs=1e-9)
    assert lams[k] >= 1.0
    # strictly peaked: increasing left of the peak, decreasing right of it
    assert all(b > a for a, b in zip(lams[: k + 1], lams[1 : k + 1]))
    assert all(b < a for a, b in zip(lams[k:], lams[k + 1 :]))


def test_transition_curve_slow_anchor():
    rows = transition_curve(default_config())[1:]
    at_45 = min(rows, key=lambda r: abs(r[0] - 45.0))
    assert at_45[1] == pytest.approx(0.838, abs=0.005)
    at_5 = min(rows, key=lambda r: abs(r[0] - 5.0))
    settled = 1.0 - abs(at_5[2] - 0.927) / (0.927 - 0.753)
    assert settled >= 0.95


def test_cycle_repeat_eight_identical_pairs():
    rows = cycle_repeat(default_config())[1:]
    assert len(rows) == 8
    waters = [r[1] for r in rows]
    els = [r[2] for r in rows]
    assert max(waters) - min(waters) < 1e-9
    assert max(els) - min(els) < 1e-9


def test_bilayer_ratio_headers():
    rows = bilayer_ratio(default_config())
    assert rows[0] == ("ratio", "r_um_water", "theta_deg_water", "theta_deg_ref40", "delta_theta_deg")


@pytest.mark.parametrize(
    "kind,golden",
    [
        ("SwellCurve", "swell_curve.csv"),
        ("TransitionCurve", "transition_curve.csv"),
        ("BilayerRatio", "bilayer_ratio.csv"),
        ("CycleRepeat", "cycle_repeat.csv"),
    ],
)
def test_golden_file_byte_equality(kind, golden, tmp_path):
    out = tmp_path / golden
    run_sweep(kind, default_config(), out_path=out)
    assert out.read_bytes() == (GOLDEN / golden).read_bytes()


def test_grid_errors():
    cfg = default_config()
    with pytest.raises(GridError):
        swell_curve(cfg, points=1)
    with pytest.raises(GridError):
        transition_curve(cfg, t_end_s=-1.0)
    with pytest.raises(GridError):
        bilayer_ratio(cfg, ratios=[])
    with pytest.raises(GridError):
        cycle_repeat(cfg, cycles=0)
    with pytest.raises(GridError):
        run_sweep("Bogus", cfg)
