import dataclasses
import math

import numpy as np
import pytest

from encirclesim import reference_scenario, run_scenario
from encirclesim.analysis import (
    cov_inv_within_bounds,
    encirclement_metrics,
    error_sample,
    evaluate_gates,
    excitation_from_result,
    theoretical_bounds,
    verify_as_recursion,
    verify_estimator_recursion,
    verify_gain_identity,
)
from encirclesim.controller import orbit_offset, trajectory_from_params
from encirclesim.scenario import ControllerParams
from encirclesim.simulate import StepRecord


@pytest.fixture(scope="module")
def ref_result():
    return run_scenario(reference_scenario(), seed=0)


def _record(k=0, x1=(0.0, 1.2), x2=(0.0, 2.4), s=(0.0, 0.0), s_hat=(0.0, 0.0),
            impulse=False, sat1=False, sat2=False, est_err=None, h=(0.0, 0.0)):
    x1, x2, s, s_hat = map(np.asarray, (x1, x2, s, s_hat))
    return StepRecord(
        k=k, x1=x1.astype(float), x2=x2.astype(float), s=s.astype(float),
        s_hat=s_hat.astype(float), u1=np.zeros(2), u2=np.zeros(2),
        d12=float(np.linalg.norm(x1 - x2)), d1s=float(np.linalg.norm(x1 - s)),
        d2s=float(np.linalg.norm(x2 - s)), h=np.asarray(h, float),
        est_err_norm=(est_err if est_err is not None
                      else float(np.linalg.norm(s_hat - s))),
        as_err_norm=float(np.linalg.norm(x1 + x2 - 2 * s)),
        impulse=impulse, sat1=sat1, sat2=sat2)


# -- error samples ---------------------------------------------------------

def test_error_sample_perfect_estimate():
    sample = error_sample(_record(s=(1.0, 1.0), s_hat=(1.0, 1.0)), np.eye(2))
    np.testing.assert_array_equal(sample.est_err, [0.0, 0.0])
    assert sample.lyap_est == 0.0


def test_error_sample_reference_initial_state():
    sample = error_sample(_record(), np.eye(2))
    np.testing.assert_allclose(sample.as_err, [0.0, 3.6])
    assert sample.lyap_as == pytest.approx(12.96)


def test_error_sample_quadratic_form():
    rec = _record(s=(0.0, 0.0), s_hat=(1.0, 1.0))
    sample = error_sample(rec, np.diag([2.0, 1.0]))
    assert sample.lyap_est == pytest.approx(3.0)


def test_lyapunov_values_match_definitions(ref_result):
    for rec, cov_inv in zip(ref_result.records[::20], ref_result.cov_inv_history[::20]):
        sample = error_sample(rec, cov_inv)
        e = rec.s_hat - rec.s
        assert sample.lyap_est == pytest.approx(float(e @ cov_inv @ e))
        assert sample.lyap_as == pytest.approx(sample.as_err_norm ** 2)
        assert sample.est_err_norm == pytest.approx(rec.est_err_norm)


# -- gates -------------------------------------------------------------------

def test_gates_reference_scenario():
    report = evaluate_gates(reference_scenario())
    assert report.gain_condition.verdict == "pass"
    assert report.gain_condition.value == pytest.approx(0.15)
    assert report.estimation_gate.verdict == "pass"
    assert report.estimation_gate.value == pytest.approx(0.6)
    assert report.as_gate_interval_scaled.verdict == "warn"
    assert report.as_gate_interval_scaled.value == pytest.approx(1.35)
    assert report.as_gate.verdict == "pass"
    assert report.as_gate.value == pytest.approx(0.0675)
    assert report.pe_window.verdict == "pass"
    assert not report.hard_fail()


def test_gates_forgetting_just_over_bound():
    cfg = reference_scenario()
    cfg = dataclasses.replace(
        cfg, estimator=dataclasses.replace(cfg.estimator, gamma1=0.4))
    report = evaluate_gates(cfg)
    assert report.estimation_gate.verdict == "fail"
    assert report.estimation_gate.value == pytest.approx(0.8)


def test_gates_scaled_as_condition_can_fail_outright():
    cfg = reference_scenario()
    cfg = dataclasses.replace(
        cfg, controller=dataclasses.replace(cfg.controller, alpha=-0.4))
    report = evaluate_gates(cfg)
    # 3*(0.6)^2 = 1.08 > 0.75: both readings fail, no warn downgrade
    assert report.as_gate.verdict == "fail"
    assert report.as_gate_interval_scaled.verdict == "fail"
    assert not report.hard_fail()


def test_gate_arithmetic_is_total():
    cfg = reference_scenario()
    for alpha in (-0.01, -0.5, -1.5, -1.99):
        c = dataclasses.replace(
            cfg, controller=dataclasses.replace(cfg.controller, alpha=alpha))
        report = evaluate_gates(c)
        assert report.gain_condition.verdict in ("pass", "fail")


# -- recursion verifiers ------------------------------------------------------

def test_estimator_recursion_reference_run(ref_result):
    assert verify_estimator_recursion(ref_result) <= 1e-9


def test_as_recursion_reference_run(ref_result):
    report = verify_as_recursion(ref_result)
    assert report.max_residual <= 1e-9
    assert report.steps_checked + report.steps_excluded == len(ref_result.records) - 1
    assert report.steps_excluded > 0  # saturation does occur after escapes


def test_gain_identity_reference_run(ref_result):
    assert verify_gain_identity(ref_result) <= 1e-9


def test_recursions_hold_across_seeds_and_params():
    cfg = reference_scenario()
    variants = [
        cfg,
        dataclasses.replace(cfg, estimator=dataclasses.replace(
            cfg.estimator, gamma1=0.5, gamma2=0.7)),
        dataclasses.replace(cfg, controller=dataclasses.replace(
            cfg.controller, alpha=-0.6, period_steps=24)),
    ]
    for variant in variants:
        for seed in (0, 3):
            result = run_scenario(variant, seed=seed)
            assert verify_estimator_recursion(result) <= 1e-9
            assert verify_as_recursion(result).max_residual <= 1e-9
            assert verify_gain_identity(result) <= 1e-9


def test_equilibrium_stays_put():
    # exact estimate, stationary target, agents on their setpoints: zero stays zero
    cfg = reference_scenario()
    target = dataclasses.replace(cfg.target, drift_amp=0.0, impulse_max=0.0,
                                 first_impulse_at_zero=False)
    traj = trajectory_from_params(cfg.controller)
    z0 = orbit_offset(traj, 0)
    cfg = dataclasses.replace(
        cfg, target=target, steps=100,
        x1_0=tuple(-z0), x2_0=tuple(z0), s_0=(0.0, 0.0),
        estimator=dataclasses.replace(cfg.estimator, estimate0=(0.0, 0.0)))
    result = run_scenario(cfg, seed=0)
    assert all(rec.est_err_norm < 1e-12 for rec in result.records)
    assert all(rec.as_err_norm < 1e-9 for rec in result.records)


def test_noisy_run_residual_reported_not_zero():
    cfg = dataclasses.replace(reference_scenario(), range_noise_std=0.01, steps=80)
    result = run_scenario(cfg, seed=1)
    assert verify_estimator_recursion(result) > 1e-9  # identity only holds noiselessly
    assert verify_gain_identity(result) <= 1e-9       # but the covariance algebra still does


def test_estimator_recursion_requires_internals(ref_result):
    broken = dataclasses.replace(ref_result, gains=ref_result.gains[:-5])
    with pytest.raises(ValueError, match="missing"):
        verify_estimator_recursion(broken)


# -- theoretical bounds -------------------------------------------------------

def test_bounds_reference_constants():
    cfg = reference_scenario()
    b = theoretical_bounds(cfg, b_check=np.eye(2))
    assert b.as_bound_drift == pytest.approx(12 * 0.0004)
    assert b.as_bound_drift == pytest.approx(0.0048)
    assert b.impulse_bound == pytest.approx(1.5 * math.sqrt(2.0))
    assert b.as_bound_impulse == pytest.approx(16 * (0.0004 + 4.5))
    assert b.as_bound_impulse == pytest.approx(72.0064)
    assert b.control_delta == pytest.approx(4.42)


def test_bounds_scale_with_b_check():
    cfg = reference_scenario()
    b = theoretical_bounds(cfg, b_check=np.diag([2.0, 5.0]))
    assert b.est_bound_drift == pytest.approx(2 * 0.3 * 0.0004 * 5.0)
    assert b.est_bound_impulse == pytest.approx(3 * 0.3 * (0.0004 + 4.5) * 5.0)


def test_bounds_degenerate_motion_all_zero():
    cfg = reference_scenario()
    cfg = dataclasses.replace(cfg, target=dataclasses.replace(
        cfg.target, drift_amp=0.0, impulse_max=0.0))
    b = theoretical_bounds(cfg, b_check=np.full((2, 2), np.inf))
    assert b.est_bound_drift == 0.0
    assert b.est_bound_impulse == 0.0
    assert b.as_bound_drift == 0.0
    assert b.as_bound_impulse == 0.0


# -- excitation bounds over a run ------------------------------------------------

def test_cov_inv_stays_within_bounds(ref_result):
    bounds = excitation_from_result(ref_result)
    assert bounds.theta_hat > 0.0
    assert cov_inv_within_bounds(ref_result, bounds)


# -- encirclement metrics ------------------------------------------------------

def test_metrics_perfect_anti_sync():
    traj = trajectory_from_params(ControllerParams(alpha=-0.85, radius=2.0,
                                                   period_steps=48, sat=0.5))
    s = np.array([1.0, -2.0])
    records = []
    for k in range(48):
        z = orbit_offset(traj, k)
        records.append(_record(k=k, x1=s - z, x2=s + z, s=s, s_hat=s))
    m = encirclement_metrics(records, window=48)
    assert m.max_as_err == pytest.approx(0.0, abs=1e-12)
    assert m.median_antipodal_angle == pytest.approx(math.pi)
    assert m.median_radius1 == pytest.approx(2.0)
    assert m.median_radius2 == pytest.approx(2.0)
    assert m.impulse_ticks == []


def test_metrics_agent_swap_invariance(ref_result):
    records = ref_result.records
    swapped = [dataclasses.replace(rec, x1=rec.x2, x2=rec.x1,
                                   d1s=rec.d2s, d2s=rec.d1s,
                                   u1=rec.u2, u2=rec.u1,
                                   sat1=rec.sat2, sat2=rec.sat1)
               for rec in records]
    a = encirclement_metrics(records, window=100, exclude_after_impulse=20)
    b = encirclement_metrics(swapped, window=100, exclude_after_impulse=20)
    assert a.max_as_err == b.max_as_err
    assert a.median_antipodal_angle == b.median_antipodal_angle
    assert a.median_radius1 == b.median_radius2
    assert a.median_radius2 == b.median_radius1


def test_metrics_exclusion_drops_post_impulse_spikes():
    records = []
    for k in range(60):
        err = 1.0 if 21 <= k <= 30 else 0.01  # spike right after the impulse at 20
        records.append(_record(k=k, s_hat=(err, 0.0), impulse=(k == 20)))
    with_excl = encirclement_metrics(records, window=60, exclude_after_impulse=10)
    without = encirclement_metrics(records, window=60, exclude_after_impulse=0)
    assert with_excl.max_est_err == pytest.approx(0.01)
    assert without.max_est_err == pytest.approx(1.0)
    assert with_excl.steps_excluded == 10


def test_metrics_recovery_times():
    # the impulse applied at k=20 surfaces in the error from k=21 on
    records = []
    for k in range(50):
        if k <= 20:
            err = 0.01
        elif k < 26:
            err = 0.8 - 0.15 * (k - 21)  # 0.8 down to 0.2, back in band at 26
        else:
            err = 0.01
        records.append(_record(k=k, s_hat=(err, 0.0), impulse=(k == 20)))
    m = encirclement_metrics(records, window=50, band_floor=0.05)
    assert m.impulse_ticks == [20]
    assert m.recovery_ticks == [6]


def test_metrics_unrecovered_is_none():
    records = [_record(k=k, s_hat=(1.0 if k > 20 else 0.0, 0.0), impulse=(k == 20))
               for k in range(40)]
    m = encirclement_metrics(records, window=40)
    assert m.recovery_ticks == [None]


def test_metrics_window_validation(ref_result):
    with pytest.raises(ValueError, match="window"):
        encirclement_metrics(ref_result.records, window=0)
    with pytest.raises(ValueError, match="window"):
        encirclement_metrics(ref_result.records, window=10_000)
