"""Error metrics, parameter gates, excitation bounds, and recursion verifiers.

Everything here is read-only over completed runs. The two recursion verifiers
recompute the closed-form error dynamics from recorded internals and report
the worst deviation from the directly measured errors; on noiseless runs both
identities hold to float precision, so a residual above ~1e-9 means the loop,
estimator, and controller no longer fit together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from .controller import orbit_offset, trajectory_from_params
from .estimator import ExcitationBounds, excitation_bounds
from .scenario import ScenarioConfig
from .simulate import SimulationResult, StepRecord

PASS = "pass"
FAIL = "fail"
WARN = "warn"


@dataclass
class ErrorSample:
    """Error state at one tick; uses ground truth, so analysis-only."""
    k: int
    est_err: np.ndarray   # s_hat - s
    as_err: np.ndarray    # x1 + x2 - 2 s
    est_err_norm: float
    as_err_norm: float
    lyap_est: float       # est_err^T cov_inv est_err
    lyap_as: float        # ||as_err||^2


def error_sample(record: StepRecord, cov_inv: np.ndarray) -> ErrorSample:
    est_err = record.s_hat - record.s
    as_err = record.x1 + record.x2 - 2.0 * record.s
    return ErrorSample(
        k=record.k,
        est_err=est_err,
        as_err=as_err,
        est_err_norm=float(np.linalg.norm(est_err)),
        as_err_norm=float(np.linalg.norm(as_err)),
        lyap_est=float(est_err @ cov_inv @ est_err),
        lyap_as=float(as_err @ as_err),
    )


@dataclass(frozen=True)
class GateCheck:
    verdict: str       # pass | fail | warn
    value: float       # computed left-hand side
    condition: str     # the inequality it was checked against

    @property
    def passed(self) -> bool:
        return self.verdict == PASS


@dataclass(frozen=True)
class GateReport:
    """Closed-form parameter conditions under which the error bounds hold.

    gain_condition: 0 < |1+alpha| < 1 (the only enforced gate).
    estimation_gate: 0 < 2*gamma1 <= 2/3, estimator convergence.
    as_gate: 3(1+alpha)^2 <= 3/4, anti-synchronization convergence.
    as_gate_interval_scaled: the same left side scaled by gap_min; reported
    because the stricter reading is unsatisfiable for typical gains (the
    reference parameters themselves violate it), so a failure is downgraded
    to warn whenever the unscaled gate passes.
    pe_window: smallest eigenvalue of the commanded one-revolution excitation
    Gramian (baseline = twice the orbit offset under ideal anti-sync) > 0.
    """
    gain_condition: GateCheck
    estimation_gate: GateCheck
    as_gate: GateCheck
    as_gate_interval_scaled: GateCheck
    pe_window: GateCheck

    def to_dict(self) -> dict:
        return {name: {"verdict": chk.verdict, "value": chk.value, "condition": chk.condition}
                for name, chk in self.__dict__.items()}

    def hard_fail(self) -> bool:
        return self.gain_condition.verdict == FAIL


def evaluate_gates(cfg: ScenarioConfig) -> GateReport:
    """Pure, total gate arithmetic: every config yields a verdict set."""
    alpha = cfg.controller.alpha
    g1 = cfg.estimator.gamma1

    v_gain = abs(1.0 + alpha)
    gain = GateCheck(PASS if 0.0 < v_gain < 1.0 else FAIL, v_gain, "0 < |1+alpha| < 1")

    v_est = 2.0 * g1
    est = GateCheck(PASS if 0.0 < v_est <= 2.0 / 3.0 else FAIL, v_est, "0 < 2*gamma1 <= 2/3")

    v_as = 3.0 * (1.0 + alpha) ** 2
    as_gate = GateCheck(PASS if 0.0 < v_as <= 0.75 else FAIL, v_as, "0 < 3(1+alpha)^2 <= 3/4")

    v_scaled = v_as * cfg.target.gap_min
    if 0.0 < v_scaled <= 0.75:
        scaled_verdict = PASS
    elif as_gate.verdict == PASS:
        scaled_verdict = WARN
    else:
        scaled_verdict = FAIL
    scaled = GateCheck(scaled_verdict, v_scaled, "0 < 3(1+alpha)^2 * gap_min <= 3/4")

    traj = trajectory_from_params(cfg.controller)
    n = cfg.controller.period_steps
    gram = np.zeros((2, 2))
    for k in range(n):
        b = -2.0 * orbit_offset(traj, k)  # ideal anti-sync baseline
        gram += np.outer(b, b)
    v_pe = float(np.linalg.eigvalsh(gram)[0])
    pe = GateCheck(PASS if v_pe > 0.0 else FAIL, v_pe,
                   "min eig of one-revolution commanded Gramian > 0")

    return GateReport(gain_condition=gain, estimation_gate=est, as_gate=as_gate,
                      as_gate_interval_scaled=scaled, pe_window=pe)


def verify_gain_identity(result: SimulationResult) -> float:
    """Max deviation of A(k) from gamma1 * cov(k+1) * cov_inv(k) over the run.

    A is built as I - K p12^T; the rank-one update makes the two forms equal,
    so this pins the gain, covariance, and its maintained inverse together.
    """
    g1 = result.config.estimator.gamma1
    worst = 0.0
    for i, grec in enumerate(result.gains):
        cov_next = result.cov_history[i + 1]
        cov_inv_prev = result.cov_inv_history[i]
        dev = float(np.max(np.abs(grec.A - g1 * cov_next @ cov_inv_prev)))
        worst = max(worst, dev)
    return worst


def verify_estimator_recursion(result: SimulationResult) -> float:
    """Max residual of the estimate-error recursion over the run.

    With e = s - s_hat the update implies e(k+1) = A(k) (e(k) + h(k)), where
    h includes the impulse on impulse ticks. Exact only for noiseless ranges;
    with noise the residual is reported, not judged.
    """
    records = result.records
    if len(records) != len(result.gains) + 1:
        raise ValueError(
            f"trace is missing estimator internals: {len(records)} records vs "
            f"{len(result.gains)} gain records (expected records-1)")
    worst = 0.0
    for i, grec in enumerate(result.gains):
        prev, cur = records[i], records[i + 1]
        e_prev = prev.s - prev.s_hat
        e_cur = cur.s - cur.s_hat
        predicted = grec.A @ (e_prev + prev.h)
        worst = max(worst, float(np.max(np.abs(e_cur - predicted))))
    return worst


@dataclass
class ASRecursionReport:
    max_residual: float
    steps_checked: int
    steps_excluded: int


def verify_as_recursion(result: SimulationResult) -> ASRecursionReport:
    """Max residual of the anti-sync error recursion on unsaturated ticks.

    e_s(k+1) = (1+alpha) e_s(k) + 2 alpha (s(k) - s_hat(k)) - 2 h(k) holds
    only when neither control was clamped at tick k; clamped ticks are
    excluded and counted.
    """
    alpha = result.config.controller.alpha
    records = result.records
    worst = 0.0
    checked = 0
    excluded = 0
    for prev, cur in zip(records, records[1:]):
        if prev.sat1 or prev.sat2:
            excluded += 1
            continue
        es_prev = prev.x1 + prev.x2 - 2.0 * prev.s
        es_cur = cur.x1 + cur.x2 - 2.0 * cur.s
        predicted = (1.0 + alpha) * es_prev + 2.0 * alpha * (prev.s - prev.s_hat) - 2.0 * prev.h
        worst = max(worst, float(np.max(np.abs(es_cur - predicted))))
        checked += 1
    return ASRecursionReport(max_residual=worst, steps_checked=checked,
                             steps_excluded=excluded)


@dataclass
class TheoreticalBounds:
    """Constants of the convergence analysis, evaluated for one scenario."""
    drift_bound: float        # per-tick drift cap
    impulse_bound: float      # Euclidean cap of the per-axis impulse draw
    control_delta: float      # bound on ||u1 - u2|| (unsaturated loop)
    est_bound_drift: float    # 2 gamma1 drift^2 bmax, drift-only decay offset
    est_bound_impulse: float  # 3 gamma1 (drift^2 + impulse^2) bmax
    as_bound_drift: float     # 12 drift^2
    as_bound_impulse: float   # 16 (drift^2 + impulse^2)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def theoretical_bounds(cfg: ScenarioConfig, b_check: np.ndarray) -> TheoreticalBounds:
    """Evaluate the bound constants from the config and an inverse-covariance
    upper bound (scalarized as its largest eigenvalue; inf-safe)."""
    nu = cfg.target.drift_amp
    theta = cfg.target.impulse_max * math.sqrt(2.0)  # conservative Euclidean cap
    g1 = cfg.estimator.gamma1
    bmax = float(np.max(np.linalg.eigvalsh(b_check))) if np.all(np.isfinite(b_check)) \
        else math.inf
    d12_0 = math.dist(cfg.x1_0, cfg.x2_0)
    if nu == 0.0 and cfg.target.impulse_max == 0.0:
        est_drift, est_impulse = 0.0, 0.0  # avoid 0*inf when bmax is unbounded
    else:
        est_drift = 2.0 * g1 * nu ** 2 * bmax
        est_impulse = 3.0 * g1 * (nu ** 2 + theta ** 2) * bmax
    return TheoreticalBounds(
        drift_bound=nu,
        impulse_bound=theta,
        control_delta=abs(cfg.controller.alpha) * (d12_0 + 2.0 * cfg.controller.radius),
        est_bound_drift=est_drift,
        est_bound_impulse=est_impulse,
        as_bound_drift=12.0 * nu ** 2,
        as_bound_impulse=16.0 * (nu ** 2 + theta ** 2),
    )


def excitation_from_result(result: SimulationResult, N: int | None = None) -> ExcitationBounds:
    """Windowed excitation of a recorded run; N defaults to one revolution."""
    if N is None:
        N = result.config.controller.period_steps
    baselines = [rec.x1 - rec.x2 for rec in result.records]
    return excitation_bounds(baselines, N, result.config.estimator)


def cov_inv_within_bounds(result: SimulationResult, bounds: ExcitationBounds,
                          N: int | None = None, rtol: float = 1e-9) -> bool:
    """Check the inverse-covariance eigenvalues stay in [min eig b_hat,
    max eig b_check] for every tick k >= N-1."""
    if N is None:
        N = result.config.controller.period_steps
    lo = float(np.min(np.linalg.eigvalsh(bounds.b_hat)))
    hi = float(np.max(np.linalg.eigvalsh(bounds.b_check))) \
        if np.all(np.isfinite(bounds.b_check)) else math.inf
    tol_lo = abs(lo) * rtol
    tol_hi = abs(hi) * rtol if math.isfinite(hi) else 0.0
    for cov_inv in result.cov_inv_history[N - 1:]:
        eigs = np.linalg.eigvalsh(cov_inv)
        if eigs[0] < lo - tol_lo or eigs[1] > hi + tol_hi:
            return False
    return True


@dataclass
class EncirclementMetrics:
    """Steady-state encirclement quality over a trailing window.

    Ticks within exclude_after_impulse of an impulse are dropped from the
    window statistics (errors spike at an escape and need the re-capture
    span to settle). Recovery times are per impulse over the whole run:
    ticks until the estimate error re-enters its pre-impulse band (max of
    the 5 preceding ticks, floored at band_floor); None means not observed
    before the run ended.
    """
    window: int
    steps_considered: int
    steps_excluded: int
    max_est_err: float
    median_est_err: float
    max_as_err: float
    median_as_err: float
    median_radius1: float
    median_radius2: float
    median_antipodal_angle: float
    impulse_ticks: list[int] = field(default_factory=list)
    recovery_ticks: list[int | None] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _antipodal_angle(rec: StepRecord) -> float:
    p1 = rec.x1 - rec.s
    p2 = rec.x2 - rec.s
    n1 = float(np.linalg.norm(p1))
    n2 = float(np.linalg.norm(p2))
    if n1 == 0.0 or n2 == 0.0:
        return math.nan
    c = float(p1 @ p2) / (n1 * n2)
    return math.acos(max(-1.0, min(1.0, c)))


def encirclement_metrics(records: list[StepRecord], window: int,
                         exclude_after_impulse: int | None = None,
                         band_floor: float = 0.05,
                         pre_band_ticks: int = 5) -> EncirclementMetrics:
    """Summarize the trailing `window` ticks of a run; see EncirclementMetrics."""
    if window < 1 or window > len(records):
        raise ValueError(f"window must be in 1..{len(records)}, got {window}")
    if exclude_after_impulse is None:
        exclude_after_impulse = 0

    impulse_ticks = [rec.k for rec in records if rec.impulse]
    excluded_ticks: set[int] = set()
    for km in impulse_ticks:
        # the impulse applied at km lands in the state at km+1
        excluded_ticks.update(range(km + 1, km + exclude_after_impulse + 1))

    tail = records[-window:]
    kept = [rec for rec in tail if rec.k not in excluded_ticks]
    est_norms = [rec.est_err_norm for rec in kept]
    as_norms = [rec.as_err_norm for rec in kept]
    radii1 = [float(np.linalg.norm(rec.x1 - rec.s)) for rec in kept]
    radii2 = [float(np.linalg.norm(rec.x2 - rec.s)) for rec in kept]
    angles = [a for a in (_antipodal_angle(rec) for rec in kept) if not math.isnan(a)]

    recovery: list[int | None] = []
    norm_by_k = {rec.k: rec.est_err_norm for rec in records}
    last_k = records[-1].k
    for km in impulse_ticks:
        band = max(band_floor,
                   max((norm_by_k[j] for j in range(max(0, km - pre_band_ticks), km + 1)
                        if j in norm_by_k), default=band_floor))
        steps = None
        for t in range(1, last_k - km + 1):
            if norm_by_k[km + t] <= band:
                steps = t
                break
        recovery.append(steps)

    return EncirclementMetrics(
        window=window,
        steps_considered=len(kept),
        steps_excluded=len(tail) - len(kept),
        max_est_err=max(est_norms) if est_norms else math.nan,
        median_est_err=median(est_norms) if est_norms else math.nan,
        max_as_err=max(as_norms) if as_norms else math.nan,
        median_as_err=median(as_norms) if as_norms else math.nan,
        median_radius1=median(radii1) if radii1 else math.nan,
        median_radius2=median(radii2) if radii2 else math.nan,
        median_antipodal_angle=median(angles) if angles else math.nan,
        impulse_ticks=impulse_ticks,
        recovery_ticks=recovery,
    )
