"""Range-only target localization: forgetting-factor recursive least squares.

The estimator never sees the true target. Its inputs are the inter-agent
baseline p12 = x1 - x2 and a scalar pseudo-measurement formed purely from the
two agent-target ranges and the agents' own positions; that scalar equals
p12^T s when the ranges are exact.

All covariance algebra is kept in rank-one update form; the inverse covariance
is maintained alongside the covariance so excitation bounds and diagnostics
never require a matrix inversion. Generic inversion appears only in test
oracles (and once at initialization for an arbitrary SPD cov0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .plant import Measurements
from .scenario import EstimatorParams


class NumericalFault(RuntimeError):
    """Covariance algebra lost positive definiteness or consistency."""


@dataclass
class EstimatorState:
    estimate: np.ndarray  # (2,) estimated target position
    cov: np.ndarray       # (2,2) SPD covariance
    cov_inv: np.ndarray   # (2,2) SPD inverse, maintained redundantly
    k: int


@dataclass
class GainRecord:
    """Internals of one update: gain K, transition A = I - K p12^T, and the
    pseudo-measurement consumed. A also equals gamma1 * cov_new * cov_inv_old
    (rank-one inversion-lemma identity), which the analysis layer verifies."""
    K: np.ndarray      # (2,)
    A: np.ndarray      # (2,2)
    pseudo: float


def _inv2(m: np.ndarray) -> np.ndarray:
    # closed-form 2x2 inverse; initialization only
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def _spd2(m: np.ndarray) -> bool:
    # Under weak excitation the eigenvalue spread of the forgetting-factor
    # covariance grows like gamma1^-k, and the 2x2 determinant is a difference
    # of near-equal products; certify "not negative definite beyond float
    # cancellation" rather than a strict det > 0 that false-fires on honest
    # wind-up.
    if not np.all(np.isfinite(m)) or m[0, 0] <= 0.0 or m[1, 1] <= 0.0:
        return False
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    cancellation = abs(m[0, 0] * m[1, 1]) + abs(m[0, 1] * m[1, 0])
    return det > -64.0 * np.finfo(float).eps * cancellation


def initial_estimator_state(params: EstimatorParams) -> EstimatorState:
    cov = np.array(params.cov0, dtype=float).reshape(2, 2)
    return EstimatorState(estimate=np.array(params.estimate0, dtype=float),
                          cov=cov, cov_inv=_inv2(cov), k=0)


def pseudo_measurement(m: Measurements, x1: np.ndarray, x2: np.ndarray) -> float:
    """Scalar observation -(d1s^2 - d2s^2 - x1.x1 + x2.x2)/2.

    Equals (x1-x2)^T s exactly when the ranges are noiseless: the squared
    position terms cancel, leaving the target projected on the baseline.
    """
    return -0.5 * (m.d1s ** 2 - m.d2s ** 2 - float(x1 @ x1) + float(x2 @ x2))


def rls_gain(state: EstimatorState, p12: np.ndarray, params: EstimatorParams) -> np.ndarray:
    """Update gain K = cov p12 / (gamma1 gamma2 + p12^T cov p12).

    Uses the prior covariance in numerator and denominator; the denominator is
    bounded below by gamma1*gamma2 > 0, so K is total.
    """
    cp = state.cov @ p12
    return cp / (params.gamma1 * params.gamma2 + float(p12 @ cp))


def covariance_update(state: EstimatorState, p12: np.ndarray,
                      params: EstimatorParams) -> tuple[np.ndarray, np.ndarray]:
    """One forgetting-factor information update.

    cov_inv_next = gamma1 cov_inv + p12 p12^T / gamma2 (a stable sum);
    cov_next takes the rank-one (Sherman-Morrison) form of the same update.

    The rank-one DOWNdate is the numerically fragile direction: during long
    excitation droughts the 1/gamma1 amplification compounds its roundoff
    until the small eigenvalue turns negative, while the information matrix
    stays exact. When the downdated covariance stops matching its stable
    inverse, it is rebuilt from that inverse instead of faulting; on
    well-excited runs the fast path is bit-for-bit in charge.
    """
    g1, g2 = params.gamma1, params.gamma2
    cov_inv_next = g1 * state.cov_inv + np.outer(p12, p12) / g2
    cp = state.cov @ p12
    cov_next = (state.cov - np.outer(cp, cp) / (g1 * g2 + float(p12 @ cp))) / g1
    # symmetrize to stop float drift from accumulating across thousands of ticks
    cov_next = 0.5 * (cov_next + cov_next.T)
    cov_inv_next = 0.5 * (cov_inv_next + cov_inv_next.T)

    cond_bound = float(np.max(np.abs(cov_next)) * np.max(np.abs(cov_inv_next)))
    drift = float(np.max(np.abs(cov_next @ cov_inv_next - np.eye(2))))
    if not _spd2(cov_next) or drift > 1e-9 + 1e-14 * cond_bound:
        cov_next = _inv2(cov_inv_next)
        cov_next = 0.5 * (cov_next + cov_next.T)

    if not (_spd2(cov_next) and _spd2(cov_inv_next)):
        raise NumericalFault(
            "covariance lost positive definiteness\n"
            f"cov_next={cov_next!r}\ncov_inv_next={cov_inv_next!r}\n"
            f"p12={p12!r} gamma1={g1} gamma2={g2}")
    return cov_next, cov_inv_next


def _check_consistency(state: EstimatorState) -> None:
    if not (np.all(np.isfinite(state.estimate)) and np.all(np.isfinite(state.cov))):
        raise NumericalFault(f"non-finite estimator state at k={state.k}")
    err = np.max(np.abs(state.cov @ state.cov_inv - np.eye(2)))
    # the product error of an exact pair scales with the conditioning, which is
    # legitimately huge during excitation droughts; only flag real divergence
    cond_bound = float(np.max(np.abs(state.cov)) * np.max(np.abs(state.cov_inv)))
    tol = 1e-6 + 1e-12 * cond_bound
    if err > tol:
        raise NumericalFault(
            f"cov/cov_inv drifted apart at k={state.k}: |cov cov_inv - I| = {err:.3e}\n"
            f"cov={state.cov!r}\ncov_inv={state.cov_inv!r}")


def rls_update(state: EstimatorState, pseudo: float, p12: np.ndarray,
               params: EstimatorParams) -> tuple[EstimatorState, GainRecord]:
    """Advance the estimate by the gain-scaled innovation and the covariance
    by one information update."""
    p12 = np.asarray(p12, dtype=float)
    K = rls_gain(state, p12, params)
    cov_next, cov_inv_next = covariance_update(state, p12, params)
    innovation = pseudo - float(p12 @ state.estimate)
    nxt = EstimatorState(estimate=state.estimate + K * innovation,
                         cov=cov_next, cov_inv=cov_inv_next, k=state.k + 1)
    _check_consistency(nxt)
    return nxt, GainRecord(K=K, A=np.eye(2) - np.outer(K, p12), pseudo=float(pseudo))


@dataclass
class ExcitationBounds:
    """Windowed excitation levels and the induced inverse-covariance bounds.

    theta_hat / theta_check are the worst-case smallest / largest eigenvalues
    of the baseline Gramian sum(p12 p12^T) over every length-N window.
    b_hat <= cov_inv(k) for k >= N-1 and cov_inv(k) <= b_check for all k
    whenever the window test passes (theta_hat > 0)."""
    theta_hat: float
    theta_check: float
    b_hat: np.ndarray    # (2,2)
    b_check: np.ndarray  # (2,2)


def excitation_bounds(p12_window, N: int, params: EstimatorParams) -> ExcitationBounds:
    """Evaluate persistent excitation over a baseline sequence starting at k=0.

    The b_check bound couples to the actual covariance trajectory through
    sum(cov_inv(k), k=1..N-1); since the covariance recursion is driven only
    by the baseline, that history is recomputed here from cov0 and the first
    N-1 baselines, so it matches a recorded run exactly.
    """
    seq = np.asarray([np.asarray(p, dtype=float) for p in p12_window])
    if len(seq) < N:
        raise ValueError(f"baseline window has {len(seq)} samples, need at least N={N}")

    grams = np.einsum("ki,kj->kij", seq, seq)
    cumulative = np.cumsum(grams, axis=0)
    windows = [cumulative[N - 1]]
    for M in range(1, len(seq) - N + 1):
        windows.append(cumulative[M + N - 1] - cumulative[M - 1])
    eigs = np.linalg.eigvalsh(np.asarray(windows))
    theta_hat = float(np.min(eigs[:, 0]))
    theta_check = float(np.max(eigs[:, 1]))

    g1, g2 = params.gamma1, params.gamma2
    eye = np.eye(2)
    cov_inv = _inv2(np.array(params.cov0, dtype=float).reshape(2, 2))
    inv_sum = np.zeros((2, 2))
    for j in range(1, N):
        cov_inv = g1 * cov_inv + np.outer(seq[j], seq[j]) / g2
        inv_sum += cov_inv

    if g1 == 1.0:
        # limits of the closed forms as the forgetting factor goes to 1:
        # the lower bound tends to theta_hat/gamma2, the upper is unbounded
        b_hat = (theta_hat / g2) * eye
        b_check = np.full((2, 2), math.inf)
    else:
        c_hat = N * (1.0 - 1.0 / g1) / (g2 * (1.0 - g1 ** (-N)))
        b_hat = c_hat * theta_hat * eye
        b_check = ((1.0 - g1) / (1.0 - g1 ** N)) * inv_sum \
            + (N / ((1.0 - g1 ** N) * g2)) * theta_check * eye
    return ExcitationBounds(theta_hat=theta_hat, theta_check=theta_check,
                            b_hat=b_hat, b_check=b_check)
