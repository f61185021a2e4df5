import assert from "node:assert/strict";
import { test } from "node:test";
import { parseFrame, steerMessage } from "../src/protocol.js";
import { makeFrame } from "./helpers.js";

test("parses a state frame", () => {
  const frame = parseFrame(JSON.stringify(makeFrame(3)));
  assert.ok(frame !== null && frame.t === "state");
  assert.equal(frame.k, 3);
});

test("rejects malformed JSON", () => {
  assert.equal(parseFrame("{nope"), null);
  assert.equal(parseFrame("42"), null);
  assert.equal(parseFrame("null"), null);
});

test("rejects state frames with missing or bad fields", () => {
  const good = makeFrame(0) as unknown as Record<string, unknown>;
  const noK = { ...good };
  delete noK.k;
  assert.equal(parseFrame(JSON.stringify(noK)), null);
  assert.equal(parseFrame(JSON.stringify({ ...good, ehat: "high" })), null);
});

test("unknown frame types are skipped, not fatal", () => {
  assert.equal(parseFrame(JSON.stringify({ t: "telemetry2", x: 1 })), null);
});

test("parses hello, warning, paused, reset and lock", () => {
  const hello = parseFrame(JSON.stringify({ t: "hello", schema: 1, history: [] }));
  assert.ok(hello !== null && hello.t === "hello");
  const warn = parseFrame(JSON.stringify({ t: "warning", message: "x" }));
  assert.ok(warn !== null && warn.t === "warning" && warn.message === "x");
  const paused = parseFrame(JSON.stringify({ t: "paused", paused: true }));
  assert.ok(paused !== null && paused.t === "paused" && paused.paused);
  assert.deepEqual(parseFrame(JSON.stringify({ t: "reset" })), { t: "reset" });
  const lock = parseFrame(JSON.stringify({ t: "lock", steering: true }));
  assert.ok(lock !== null && lock.t === "lock" && lock.steering);
});

test("steer message shape", () => {
  assert.deepEqual(JSON.parse(steerMessage(0.1, -0.2)),
                   { t: "steer", vx: 0.1, vy: -0.2 });
  assert.deepEqual(JSON.parse(steerMessage(null, null)),
                   { t: "steer", vx: null, vy: null });
});
