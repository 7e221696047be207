"""Bimorph bending, thickness-ratio sweeps, and the gripper aperture model."""

import math

import numpy as np
import pytest

from microforge import bilayer
from microforge.bilayer import (
    BilayerSpec,
    GripperSpec,
    GripperState,
    bend_angle,
    bend_radius,
    bend_radius_formula,
    gripper_aperture,
    sweep_thickness_ratio,
)


def oracle_radius(m, n, eps, h):
    # independently coded expression (kept deliberately separate in form)
    inner = 8.0 * (1.0 + m) ** 2 + (1.0 + m * n) * (m ** 2 + 1.0 / (m * n))
    return h * inner / (6.0 * eps * (1.0 + m) ** 2)


def test_value_check_m1_n2():
    # hand evaluation: numerator 8*4 + 3*1.5 = 36.5, denominator 6*4 = 24
    assert bend_radius_formula(1.0, 2.0, 1.0, 1.0) == pytest.approx(36.5 / 24.0, abs=1e-6)
    assert oracle_radius(1.0, 2.0, 1.0, 1.0) == pytest.approx(36.5 / 24.0, abs=1e-15)


def test_formula_matches_oracle_1000_random_tuples():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        m = float(rng.uniform(0.05, 20.0))
        n = float(rng.uniform(0.1, 10.0))
        eps = float(rng.uniform(-1.0, 1.0)) or 0.3
        got = bend_radius_formula(m, n, eps, 1.0)
        assert got == pytest.approx(oracle_radius(m, n, eps, 1.0), rel=1e-12)


def test_zero_mismatch_straight_beam():
    spec = BilayerSpec(epsilon_fn=lambda phi: 0.0)
    assert math.isinf(bend_radius(spec, 0.5))
    assert bend_angle(spec, 0.5) == 0.0


def test_radius_inverse_in_strain():
    r1 = bend_radius_formula(2.0, 2.0, 0.1, 1.0)
    for k in (0.5, 2.0, 7.0):
        assert bend_radius_formula(2.0, 2.0, 0.1 * k, 1.0) == pytest.approx(r1 / k, rel=1e-12)


def test_angle_linear_in_length():
    eps = lambda phi: 0.05
    s1 = BilayerSpec(length_um=59.0, epsilon_fn=eps)
    s2 = BilayerSpec(length_um=118.0, epsilon_fn=eps)
    assert bend_angle(s2, 1.0) == pytest.approx(2.0 * bend_angle(s1, 1.0), rel=1e-12)


def test_sweep_single_ratio_reproduces_value_check():
    out = sweep_thickness_ratio(2.0, 1.0, [1.0], mode="fixed_total", total_um=1.0)
    assert len(out) == 1
    ratio, r, theta = out[0]
    assert ratio == 1.0
    assert r == pytest.approx(36.5 / 24.0, abs=1e-9)


def test_sweep_rejects_bad_grids():
    with pytest.raises(ValueError):
        sweep_thickness_ratio(2.0, 1.0, [])
    with pytest.raises(ValueError):
        sweep_thickness_ratio(2.0, 1.0, [1.0, -2.0])
    with pytest.raises(ValueError):
        sweep_thickness_ratio(2.0, 1.0, [1.0], mode="bogus")


def test_unique_interior_radius_minimum_each_n():
    for n in (1.5, 2.0, 3.0):
        grid = np.geomspace(0.05, 20.0, 4000)
        vals = [abs(bend_radius_formula(float(m), n, 1.0, 1.0)) for m in grid]
        k = int(np.argmin(vals))
        assert 0 < k < len(grid) - 1
        # single local minimum: decreasing before, increasing after
        assert all(b < a for a, b in zip(vals[: k + 1], vals[1 : k + 1]))
        assert all(b > a for a, b in zip(vals[k:], vals[k + 1 :]))


def test_analytic_optimum_and_convention_selection():
    # fixed convention (m = soft/hard, n = hard/soft, fixed total) gives ~0.71,
    # which contradicts the claimed 0.47; the nearest of the four symbol
    # interpretations is the inverted modulus ratio under a fixed hard layer
    default_argmin = bilayer.analytic_optimum_ratio(2.0, mode="fixed_total")
    assert default_argmin == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-3)
    key, value = bilayer.nearest_convention(target=0.47)
    assert value == pytest.approx(0.47, abs=0.05)
    assert key == ("soft_over_hard", "soft_over_hard", "fixed_hard")


def test_calibrated_swing_hits_27_degrees_at_ratio_2():
    eps = bilayer.calibrated_mismatch()
    spec = BilayerSpec(epsilon_fn=eps)  # h_soft 12 / h_hard 6 = ratio 2
    delta = bend_angle(spec, 1.0) - bend_angle(spec, 0.40)
    assert abs(delta) == pytest.approx(27.0, abs=1e-9)


def test_swing_peak_location_and_tails():
    from microforge.config import default_config
    from microforge.sweeps import bilayer_ratio

    rows = bilayer_ratio(default_config())[1:]
    ratios = [r[0] for r in rows]
    deltas = [abs(r[4]) for r in rows]
    k = int(np.argmax(deltas))
    assert 1.5 <= ratios[k] <= 2.5
    assert 0 < k < len(ratios) - 1
    assert all(b <= a for a, b in zip(deltas[k:], deltas[k + 1 :]))
    assert all(b >= a for a, b in zip(deltas[: k + 1], deltas[1 : k + 1]))
    at_two = min(rows, key=lambda r: abs(r[0] - 2.0))
    assert abs(at_two[4]) == pytest.approx(27.0, abs=2.0)


def test_gripper_states_across_compositions():
    grip = GripperSpec.default()
    ref = gripper_aperture(grip, 0.40)
    assert ref.state is GripperState.CLOSED
    assert ref.aperture_um == grip.jaw_gap_closed_um  # jaws pressed on the stop
    water = gripper_aperture(grip, 1.00)
    assert water.state is GripperState.OPEN
    assert water.aperture_um > grip.jaw_gap_closed_um + 40.0
    el = gripper_aperture(grip, 0.0)
    assert el.state is GripperState.INTERMEDIATE


def test_gripper_symmetric_jaws_balanced():
    grip = GripperSpec.default()
    for phi in (0.0, 0.4, 1.0):
        left = grip.mount_sign * bend_angle(grip.left, phi)
        right = grip.mount_sign * bend_angle(grip.right, phi)
        assert left == right  # identical specs: centerline displacement cancels


def test_aperture_monotone_in_opening():
    grip = GripperSpec.default()
    lams = np.linspace(1.05, 0.70, 40)
    apertures = [bilayer.gripper_aperture_kinetic(grip, float(l)).aperture_um for l in lams]
    assert all(b >= a - 1e-12 for a, b in zip(apertures, apertures[1:]))


def test_threshold_validation():
    jaw = BilayerSpec(epsilon_fn=lambda phi: 0.0)
    with pytest.raises(ValueError):
        GripperSpec(left=jaw, right=jaw, open_threshold_deg=5.0, close_threshold_deg=10.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        BilayerSpec(length_um=-1.0)
    with pytest.raises(ValueError):
        BilayerSpec(modulus_ratio_n=0.0)
    with pytest.raises(ValueError):
        bend_radius_formula(-1.0, 2.0, 1.0, 1.0)
