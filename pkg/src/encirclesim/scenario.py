"""Scenario definitions: parameter sets, validation, and config file I/O.

A ScenarioConfig is a plain immutable value (floats, ints, tuples) so that
equality, hashing and round-trip serialization are exact. Simulation code
converts the tuples to numpy arrays at the loop boundary.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, IO

Vec2 = tuple[float, float]
Mat2 = tuple[float, float, float, float]  # row-major 2x2


class ScenarioError(ValueError):
    """A scenario file or parameter set violates its contract."""


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ScenarioError(message)


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class EstimatorParams:
    """Recursive least-squares settings.

    gamma1 is the exponential forgetting factor, gamma2 the new-information
    utilization factor. cov0 is the initial covariance (row-major 2x2,
    symmetric positive definite); estimate0 the initial target estimate.
    """

    gamma1: float
    gamma2: float
    cov0: Mat2 = (1.0, 0.0, 0.0, 1.0)
    estimate0: Vec2 = (0.0, 0.0)

    def validate(self) -> None:
        _require(_finite(self.gamma1, self.gamma2, *self.cov0, *self.estimate0),
                 "estimator parameters must be finite")
        _require(0.0 < self.gamma1 <= 1.0,
                 f"estimator.gamma1 must satisfy 0 < gamma1 <= 1, got {self.gamma1}")
        _require(0.0 < self.gamma2 <= 1.0,
                 f"estimator.gamma2 must satisfy 0 < gamma2 <= 1, got {self.gamma2}")
        a, b, c, d = self.cov0
        _require(b == c, f"estimator.cov0 must be symmetric, got off-diagonal {b} != {c}")
        # symmetric 2x2 is SPD iff the leading entry and determinant are positive
        _require(a > 0.0 and a * d - b * c > 0.0,
                 f"estimator.cov0 must be positive definite, got {self.cov0}")


@dataclass(frozen=True)
class ControllerParams:
    """Anti-synchronization controller settings.

    alpha is the shared feedback gain, radius the commanded circling radius,
    period_steps the integer number of ticks per revolution, sat the per-axis
    control saturation in meters per step. sat_mode selects per-axis clamping
    ("axis", default) or a Euclidean-norm cap ("norm").
    """

    alpha: float
    radius: float
    period_steps: int
    sat: float
    sat_mode: str = "axis"

    def validate(self) -> None:
        _require(_finite(self.alpha, self.radius, self.sat),
                 "controller parameters must be finite")
        v = abs(1.0 + self.alpha)
        _require(0.0 < v < 1.0,
                 f"controller.alpha must satisfy 0 < |1+alpha| < 1, got |1+{self.alpha}| = {v}")
        _require(self.radius > 0.0, f"controller.radius must be > 0, got {self.radius}")
        _require(isinstance(self.period_steps, int) and self.period_steps >= 4,
                 f"controller.period_steps must be an integer >= 4, got {self.period_steps}")
        _require(self.sat > 0.0, f"controller.sat must be > 0, got {self.sat}")
        _require(self.sat_mode in ("axis", "norm"),
                 f"controller.sat_mode must be 'axis' or 'norm', got {self.sat_mode!r}")


@dataclass(frozen=True)
class TargetMotionParams:
    """Target displacement model: slow drift plus stochastic impulses.

    Per tick k the drift is drift_amp * (cos(drift_freq*k), sin(drift_freq*k)).
    Impulses add a per-axis displacement of up to impulse_max meters; gaps
    between impulses are drawn uniformly from [gap_min, gap_max] ticks.
    signed_impulses switches the per-axis draw from U(0,1) to U(-1,1).
    """

    drift_amp: float
    drift_freq: float
    impulse_max: float
    gap_min: int
    gap_max: int
    first_impulse_at_zero: bool = True
    signed_impulses: bool = False

    def validate(self) -> None:
        _require(_finite(self.drift_amp, self.drift_freq, self.impulse_max),
                 "target parameters must be finite")
        _require(self.drift_amp >= 0.0, f"target.drift_amp must be >= 0, got {self.drift_amp}")
        _require(self.impulse_max >= 0.0,
                 f"target.impulse_max must be >= 0, got {self.impulse_max}")
        _require(isinstance(self.gap_min, int) and isinstance(self.gap_max, int)
                 and 1 <= self.gap_min <= self.gap_max,
                 f"target gaps must satisfy 1 <= gap_min <= gap_max, "
                 f"got gap_min={self.gap_min}, gap_max={self.gap_max}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete closed-loop experiment description."""

    estimator: EstimatorParams
    controller: ControllerParams
    target: TargetMotionParams
    x1_0: Vec2
    x2_0: Vec2
    s_0: Vec2
    steps: int
    seed: int = 0
    range_noise_std: float = 0.0

    def validate(self) -> None:
        self.estimator.validate()
        self.controller.validate()
        self.target.validate()
        _require(_finite(*self.x1_0, *self.x2_0, *self.s_0, self.range_noise_std),
                 "initial state and noise level must be finite")
        _require(self.x1_0 != self.x2_0,
                 f"init.x1 and init.x2 must differ (inter-agent baseline would be zero), "
                 f"got both = {self.x1_0}")
        _require(isinstance(self.steps, int) and self.steps >= 1,
                 f"run.steps must be an integer >= 1, got {self.steps}")
        _require(isinstance(self.seed, int) and -(2**63) <= self.seed < 2**64,
                 f"run.seed must be a 64-bit integer, got {self.seed}")
        _require(self.range_noise_std >= 0.0,
                 f"run.range_noise_std must be >= 0, got {self.range_noise_std}")

    def digest(self) -> str:
        """Hex digest of the canonical serialization, seed-independent so that
        per-seed runs of one scenario share a digest."""
        normalized = dataclasses.replace(self, seed=0)
        return hashlib.sha256(scenario_to_text(normalized).encode()).hexdigest()[:16]

    def to_dict(self) -> dict[str, Any]:
        return {
            "estimator": {
                "gamma1": self.estimator.gamma1,
                "gamma2": self.estimator.gamma2,
                "cov0": list(self.estimator.cov0),
                "estimate0": list(self.estimator.estimate0),
            },
            "controller": {
                "alpha": self.controller.alpha,
                "radius": self.controller.radius,
                "period_steps": self.controller.period_steps,
                "sat": self.controller.sat,
                "sat_mode": self.controller.sat_mode,
            },
            "target": {
                "drift_amp": self.target.drift_amp,
                "drift_freq": self.target.drift_freq,
                "impulse_max": self.target.impulse_max,
                "gap_min": self.target.gap_min,
                "gap_max": self.target.gap_max,
                "first_impulse_at_zero": self.target.first_impulse_at_zero,
                "signed_impulses": self.target.signed_impulses,
            },
            "init": {"x1": list(self.x1_0), "x2": list(self.x2_0), "s": list(self.s_0)},
            "run": {
                "steps": self.steps,
                "seed": self.seed,
                "range_noise_std": self.range_noise_std,
            },
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "ScenarioConfig":
        try:
            e, c, t = d["estimator"], d["controller"], d["target"]
            cfg = ScenarioConfig(
                estimator=EstimatorParams(
                    gamma1=float(e["gamma1"]), gamma2=float(e["gamma2"]),
                    cov0=tuple(float(v) for v in e["cov0"]),
                    estimate0=tuple(float(v) for v in e["estimate0"]),
                ),
                controller=ControllerParams(
                    alpha=float(c["alpha"]), radius=float(c["radius"]),
                    period_steps=int(c["period_steps"]), sat=float(c["sat"]),
                    sat_mode=str(c["sat_mode"]),
                ),
                target=TargetMotionParams(
                    drift_amp=float(t["drift_amp"]), drift_freq=float(t["drift_freq"]),
                    impulse_max=float(t["impulse_max"]),
                    gap_min=int(t["gap_min"]), gap_max=int(t["gap_max"]),
                    first_impulse_at_zero=bool(t["first_impulse_at_zero"]),
                    signed_impulses=bool(t["signed_impulses"]),
                ),
                x1_0=tuple(float(v) for v in d["init"]["x1"]),
                x2_0=tuple(float(v) for v in d["init"]["x2"]),
                s_0=tuple(float(v) for v in d["init"]["s"]),
                steps=int(d["run"]["steps"]),
                seed=int(d["run"]["seed"]),
                range_noise_std=float(d["run"]["range_noise_std"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"malformed scenario dict: {exc}") from exc
        cfg.validate()
        return cfg


def reference_scenario() -> ScenarioConfig:
    """The built-in benchmark scenario used throughout the test suite.

    Forgetting factor 0.3, information factor 0.9, controller gain -0.85,
    circling radius 2 m with a 48-tick revolution, per-axis saturation 0.5,
    drift 0.02*(cos 0.01k, sin 0.01k), impulses up to 1.5 m per axis with
    gaps of 20..60 ticks starting at k=0, agents at (0,1.2) and (0,2.4),
    target and initial estimate at the origin, 300 ticks.
    """
    cfg = ScenarioConfig(
        estimator=EstimatorParams(gamma1=0.3, gamma2=0.9),
        controller=ControllerParams(alpha=-0.85, radius=2.0, period_steps=48, sat=0.5),
        target=TargetMotionParams(drift_amp=0.02, drift_freq=0.01, impulse_max=1.5,
                                  gap_min=20, gap_max=60),
        x1_0=(0.0, 1.2),
        x2_0=(0.0, 2.4),
        s_0=(0.0, 0.0),
        steps=300,
        seed=0,
    )
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# config file I/O (INI-style key = value under fixed sections)

_MISSING = object()


def _parse_float(raw: str) -> float:
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _parse_int(raw: str) -> int:
    try:
        return int(raw, 0)
    except ValueError:
        raise ValueError("must be an integer") from None


_BOOLS = {"true": True, "yes": True, "on": True, "1": True,
          "false": False, "no": False, "off": False, "0": False}


def _parse_bool(raw: str) -> bool:
    try:
        return _BOOLS[raw.strip().lower()]
    except KeyError:
        raise ValueError("must be a boolean (true/false)") from None


def _parse_vec(n: int):
    def conv(raw: str) -> tuple[float, ...]:
        parts = raw.split()
        if len(parts) != n:
            raise ValueError(f"must be {n} whitespace-separated numbers")
        return tuple(_parse_float(p) for p in parts)
    return conv


def _get(parser: configparser.ConfigParser, section: str, key: str, conv, default=_MISSING):
    if not parser.has_option(section, key):
        if default is not _MISSING:
            return default
        raise ScenarioError(f"missing required key [{section}] {key}")
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except ValueError as exc:
        raise ScenarioError(f"[{section}] {key}: {exc} (got {raw!r})") from None


def load_scenario(source: str | Path | IO[str]) -> ScenarioConfig:
    """Load and validate a scenario from a config file path or open stream."""
    if hasattr(source, "read"):
        text = source.read()
        origin = getattr(source, "name", "<stream>")
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
        origin = str(path)

    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ScenarioError(f"scenario parse error: {exc}") from exc
    for section in ("estimator", "controller", "target", "init", "run"):
        if not parser.has_section(section):
            raise ScenarioError(f"missing required section [{section}] in {origin}")

    gap_min = _get(parser, "target", "gap_min", _parse_int)
    cfg = ScenarioConfig(
        estimator=EstimatorParams(
            gamma1=_get(parser, "estimator", "gamma1", _parse_float),
            gamma2=_get(parser, "estimator", "gamma2", _parse_float),
            cov0=_get(parser, "estimator", "cov0", _parse_vec(4), (1.0, 0.0, 0.0, 1.0)),
            estimate0=_get(parser, "estimator", "estimate0", _parse_vec(2), (0.0, 0.0)),
        ),
        controller=ControllerParams(
            alpha=_get(parser, "controller", "alpha", _parse_float),
            radius=_get(parser, "controller", "radius", _parse_float),
            period_steps=_get(parser, "controller", "period_steps", _parse_int),
            sat=_get(parser, "controller", "sat", _parse_float),
            sat_mode=_get(parser, "controller", "sat_mode", str.strip, "axis"),
        ),
        target=TargetMotionParams(
            drift_amp=_get(parser, "target", "drift_amp", _parse_float),
            drift_freq=_get(parser, "target", "drift_freq", _parse_float),
            impulse_max=_get(parser, "target", "impulse_max", _parse_float),
            gap_min=gap_min,
            gap_max=_get(parser, "target", "gap_max", _parse_int, 3 * gap_min),
            first_impulse_at_zero=_get(parser, "target", "first_impulse_at_zero",
                                       _parse_bool, True),
            signed_impulses=_get(parser, "target", "signed_impulses", _parse_bool, False),
        ),
        x1_0=_get(parser, "init", "x1", _parse_vec(2)),
        x2_0=_get(parser, "init", "x2", _parse_vec(2)),
        s_0=_get(parser, "init", "s", _parse_vec(2)),
        steps=_get(parser, "run", "steps", _parse_int),
        seed=_get(parser, "run", "seed", _parse_int, 0),
        range_noise_std=_get(parser, "run", "range_noise_std", _parse_float, 0.0),
    )
    cfg.validate()
    return cfg


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return " ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)  # shortest round-trip form keeps reload bit-exact
    return str(v)


def scenario_to_text(cfg: ScenarioConfig) -> str:
    """Canonical config-file serialization; load_scenario(save) is bit-exact."""
    e, c, t = cfg.estimator, cfg.controller, cfg.target
    lines = [
        "[estimator]",
        f"gamma1 = {_fmt(e.gamma1)}",
        f"gamma2 = {_fmt(e.gamma2)}",
        f"cov0 = {_fmt(e.cov0)}",
        f"estimate0 = {_fmt(e.estimate0)}",
        "",
        "[controller]",
        f"alpha = {_fmt(c.alpha)}",
        f"radius = {_fmt(c.radius)}",
        f"period_steps = {c.period_steps}",
        f"sat = {_fmt(c.sat)}",
        f"sat_mode = {c.sat_mode}",
        "",
        "[target]",
        f"drift_amp = {_fmt(t.drift_amp)}",
        f"drift_freq = {_fmt(t.drift_freq)}",
        f"impulse_max = {_fmt(t.impulse_max)}",
        f"gap_min = {t.gap_min}",
        f"gap_max = {t.gap_max}",
        f"first_impulse_at_zero = {_fmt(t.first_impulse_at_zero)}",
        f"signed_impulses = {_fmt(t.signed_impulses)}",
        "",
        "[init]",
        f"x1 = {_fmt(cfg.x1_0)}",
        f"x2 = {_fmt(cfg.x2_0)}",
        f"s = {_fmt(cfg.s_0)}",
        "",
        "[run]",
        f"steps = {cfg.steps}",
        f"seed = {cfg.seed}",
        f"range_noise_std = {_fmt(cfg.range_noise_std)}",
        "",
    ]
    return "\n".join(lines)


def save_scenario(cfg: ScenarioConfig, path: str | Path) -> None:
    cfg.validate()
    Path(path).write_text(scenario_to_text(cfg))
