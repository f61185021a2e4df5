"""Anti-synchronization control: circling setpoints and the saturated gain law.

Both agents share one rotating offset of norm equal to the circling radius;
agent 1 tracks estimate - offset, agent 2 tracks estimate + offset. Summing
the two raw controls cancels the offset entirely, which is what drives the
agents antipodal about the estimate. The controller never sees the true
target, only (x1, x2, estimate, k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import ControllerParams


@dataclass(frozen=True)
class CirclingTrajectory:
    radius: float
    period_steps: int
    phase0: float = 0.0


def trajectory_from_params(params: ControllerParams, phase0: float = 0.0) -> CirclingTrajectory:
    return CirclingTrajectory(radius=params.radius, period_steps=params.period_steps,
                              phase0=phase0)


def orbit_offset(traj: CirclingTrajectory, k: int) -> np.ndarray:
    """Rotating offset (r sin a, r cos a), a = 2 pi k / period + phase0.

    k is reduced modulo the period before the float math so outputs repeat
    bit-for-bit every revolution.
    """
    a = math.tau * (k % traj.period_steps) / traj.period_steps + traj.phase0
    return np.array([traj.radius * math.sin(a), traj.radius * math.cos(a)])


@dataclass
class ControlOutput:
    u1: np.ndarray      # (2,) post-saturation, global frame
    u2: np.ndarray
    u1_raw: np.ndarray  # pre-saturation
    u2_raw: np.ndarray
    saturated1: bool
    saturated2: bool


def _saturate(u: np.ndarray, sat: float, mode: str) -> tuple[np.ndarray, bool]:
    if mode == "norm":
        n = float(np.linalg.norm(u))
        if n <= sat:
            return u.copy(), False
        return u * (sat / n), True
    out = np.clip(u, -sat, sat)
    return out, bool(np.any(out != u))


def anti_sync_control(x1: np.ndarray, x2: np.ndarray, estimate: np.ndarray,
                      traj: CirclingTrajectory, k: int,
                      params: ControllerParams) -> ControlOutput:
    """u1 = alpha (x1 - estimate + offset), u2 = alpha (x2 - estimate - offset),
    each saturated per params.sat / params.sat_mode."""
    z = orbit_offset(traj, k)
    u1_raw = params.alpha * (x1 - estimate + z)
    u2_raw = params.alpha * (x2 - estimate - z)
    u1, sat1 = _saturate(u1_raw, params.sat, params.sat_mode)
    u2, sat2 = _saturate(u2_raw, params.sat, params.sat_mode)
    return ControlOutput(u1=u1, u2=u2, u1_raw=u1_raw, u2_raw=u2_raw,
                         saturated1=sat1, saturated2=sat2)


def control_delta_bound(params: ControllerParams, d12_0: float) -> float:
    """Bound |alpha| (d12(0) + 2r) on ||u1 - u2|| along unsaturated closed-loop
    trajectories; requires the contraction condition 0 < |1+alpha| < 1."""
    v = abs(1.0 + params.alpha)
    if not 0.0 < v < 1.0:
        raise ValueError(f"gain condition violated: |1+alpha| = {v}, need 0 < |1+alpha| < 1")
    return abs(params.alpha) * (d12_0 + 2.0 * params.radius)
