import assert from "node:assert/strict";
import { test } from "node:test";
import {
  directionFromKeys,
  joystickInput,
  SendGate,
  steerVelocity,
} from "../src/input.js";

test("arrow keys map to unit directions", () => {
  assert.deepEqual(directionFromKeys(new Set(["ArrowUp"])), { x: 0, y: 1 });
  assert.deepEqual(directionFromKeys(new Set(["KeyS"])), { x: 0, y: -1 });
  const diag = directionFromKeys(new Set(["ArrowUp", "ArrowRight"]))!;
  assert.ok(Math.abs(Math.hypot(diag.x, diag.y) - 1) < 1e-12);
  assert.ok(diag.x > 0 && diag.y > 0);
});

test("opposing keys cancel; no keys is null", () => {
  assert.equal(directionFromKeys(new Set(["ArrowUp", "ArrowDown"])), null);
  assert.equal(directionFromKeys(new Set()), null);
});

test("joystick has a dead zone and clamps magnitude", () => {
  assert.deepEqual(joystickInput(1, 1, 48), { direction: null, magnitude: 0 });
  const full = joystickInput(100, 0, 48);
  assert.equal(full.magnitude, 1);
  assert.deepEqual(full.direction, { x: 1, y: -0 });
  const half = joystickInput(0, -24, 48); // screen up = world +y
  assert.ok(Math.abs(half.magnitude - 0.5) < 1e-12);
  assert.deepEqual(half.direction, { x: 0, y: 1 });
});

test("steer velocity scales by magnitude and max speed", () => {
  const wire = steerVelocity(
    { direction: { x: 0, y: 1 }, magnitude: 0.5, boostRequested: false }, 0.5);
  assert.deepEqual(wire, { vx: 0, vy: 0.25 });
  assert.deepEqual(
    steerVelocity({ direction: null, magnitude: 0, boostRequested: false }, 0.5),
    { vx: null, vy: null });
});

test("send gate caps the message rate at the tick rate", () => {
  const gate = new SendGate(100); // 10 ms interval
  let sent = 0;
  for (let t = 0; t < 100; t += 1) {
    if (gate.shouldSend(t)) sent += 1;
  }
  assert.equal(sent, 10);
});
