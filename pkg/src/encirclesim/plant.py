"""Ground-truth world: agent kinematics, impulsive target motion, range sensing.

All operations are pure state transitions over value types; the only mutable
object is the RNG stream, owned by the caller's simulation loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import TargetMotionParams


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = math.remainder(a, math.tau)
    return math.pi if w <= -math.pi else w


@dataclass
class AgentState:
    position: np.ndarray  # (2,) meters, global frame
    yaw: float            # radians, (-pi, pi]


@dataclass
class TargetState:
    position: np.ndarray     # (2,) meters
    next_impulse_step: int   # tick at which the next impulse fires
    impulses_emitted: int = 0


@dataclass
class ActuationCommand:
    """Local-frame displacement plus the yaw the agent turns to after moving."""
    dx_local: float
    dy_local: float
    new_yaw: float


@dataclass
class Measurements:
    """One tick of sensing: ranges plus quantities the agents know exactly."""
    d12: float
    d1s: float
    d2s: float
    p12: np.ndarray   # x1 - x2, exact
    psi1: np.ndarray  # agent 1 self-displacement over the last tick, exact
    psi2: np.ndarray


def agent_step(state: AgentState, cmd: ActuationCommand) -> AgentState:
    """Advance one tick: rotate the local displacement by the pre-step yaw,
    then turn to cmd.new_yaw.

    The pre-step yaw convention is what makes global_to_actuation an exact
    inverse (see its round-trip contract).
    """
    if not all(math.isfinite(v) for v in (cmd.dx_local, cmd.dy_local, cmd.new_yaw)):
        raise ValueError(f"non-finite actuation command: {cmd}")
    c, s = math.cos(state.yaw), math.sin(state.yaw)
    delta = np.array([cmd.dx_local * c - cmd.dy_local * s,
                      cmd.dx_local * s + cmd.dy_local * c])
    return AgentState(position=state.position + delta, yaw=wrap_angle(cmd.new_yaw))


def global_to_actuation(u: np.ndarray, agent: AgentState, estimate: np.ndarray) -> ActuationCommand:
    """Convert a global-frame position delta into a local command.

    The local displacement is the inverse rotation of u by the agent's current
    (pre-step) yaw, so agent_step(state, global_to_actuation(u, state, e))
    lands exactly at state.position + u. The new yaw points at the estimate.
    """
    if not np.all(np.isfinite(u)):
        raise ValueError(f"non-finite control input: {u}")
    los = estimate - agent.position
    if los[0] == 0.0 and los[1] == 0.0:
        raise ValueError(
            f"degenerate yaw: target estimate coincides with agent position {agent.position}")
    new_yaw = math.atan2(los[1], los[0])
    c, s = math.cos(agent.yaw), math.sin(agent.yaw)
    return ActuationCommand(dx_local=u[0] * c + u[1] * s,
                            dy_local=-u[0] * s + u[1] * c,
                            new_yaw=new_yaw)


def initial_target_state(params: TargetMotionParams, s0, rng) -> TargetState:
    """Seed the target state and its impulse schedule."""
    if params.first_impulse_at_zero:
        nxt = 0
    else:
        nxt = int(rng.integers(params.gap_min, params.gap_max + 1))
    return TargetState(position=np.asarray(s0, dtype=float).copy(), next_impulse_step=nxt)


def target_step(state: TargetState, k: int, params: TargetMotionParams,
                rng) -> tuple[TargetState, np.ndarray, bool]:
    """Advance the target one tick; returns (new state, applied displacement, impulse?).

    Drift is drift_amp*(cos(drift_freq*k), sin(drift_freq*k)). On a scheduled
    tick a per-axis impulse of impulse_max*U(0,1) (U(-1,1) when signed) is
    added and the next impulse is drawn gap_min..gap_max ticks ahead.
    """
    if k > state.next_impulse_step:
        raise ValueError(
            f"target state is stale: tick {k} is past scheduled impulse "
            f"{state.next_impulse_step}")
    h = params.drift_amp * np.array([math.cos(params.drift_freq * k),
                                     math.sin(params.drift_freq * k)])
    impulse = k == state.next_impulse_step
    nxt = state.next_impulse_step
    emitted = state.impulses_emitted
    if impulse:
        lo = -1.0 if params.signed_impulses else 0.0
        h = h + params.impulse_max * rng.uniform(lo, 1.0, size=2)
        nxt = k + int(rng.integers(params.gap_min, params.gap_max + 1))
        emitted += 1
    return TargetState(state.position + h, nxt, emitted), h, impulse


def sense(x1: AgentState, x2: AgentState, target: TargetState,
          prev1: np.ndarray, prev2: np.ndarray,
          noise_std: float = 0.0, rng=None) -> Measurements:
    """Range measurements plus the exact self-knowledge of the agents.

    With noise_std > 0 each distance is perturbed by independent zero-mean
    Gaussian noise (draw order d12, d1s, d2s) and clamped at zero.
    """
    p12 = x1.position - x2.position
    d12 = float(np.linalg.norm(p12))
    d1s = float(np.linalg.norm(x1.position - target.position))
    d2s = float(np.linalg.norm(x2.position - target.position))
    if noise_std > 0.0:
        d12 = max(0.0, d12 + noise_std * float(rng.standard_normal()))
        d1s = max(0.0, d1s + noise_std * float(rng.standard_normal()))
        d2s = max(0.0, d2s + noise_std * float(rng.standard_normal()))
    return Measurements(d12=d12, d1s=d1s, d2s=d2s, p12=p12,
                        psi1=x1.position - prev1, psi2=x2.position - prev2)
