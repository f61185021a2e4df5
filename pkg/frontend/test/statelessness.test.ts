/**
 * Statelessness acceptance: a client that reconnects mid-session must render
 * exactly what a continuously connected client renders, from the stream
 * alone. Compared at the draw-command level, where equality means identical
 * pixels up to antialiasing.
 */

import assert from "node:assert/strict";
import { test } from "node:test";
import { buildScene } from "../src/render.js";
import { LiveState } from "../src/state.js";
import { StateFrame } from "../src/protocol.js";
import { ScriptedClient, startServer } from "./helpers.js";

function stateAtTick(client: ScriptedClient, k: number): LiveState {
  const state = new LiveState();
  state.applyHello({ ...client.hello!, history: [] });
  for (const frame of client.frames) {
    if (frame.k <= k) state.applyState(frame);
  }
  return state;
}

test("reconnecting mid-session reproduces the rendered world", { timeout: 90000 }, async () => {
  const server = await startServer();
  const original = new ScriptedClient(server.url);
  try {
    await original.connected();
    await original.until(() => original.hello !== null);
    // let the world evolve a while
    await original.until(() => original.frames.length >= 60);

    // second client joins mid-session; its hello replays the missed window
    const reconnected = new ScriptedClient(server.url);
    await reconnected.connected();
    await reconnected.until(() => reconnected.hello !== null);
    assert.ok(reconnected.hello!.history.length >= 50,
      "hello must replay the recent state history");

    // collect until both clients have seen the same later tick
    const targetK = reconnected.hello!.history[reconnected.hello!.history.length - 1].k + 40;
    await original.until(() =>
      original.frames.some((f) => f.k >= targetK));
    await reconnected.until(() =>
      reconnected.frames.some((f) => f.k >= targetK));

    // build both worlds up to the common tick
    const a = stateAtTick(original, targetK);
    const b = new LiveState();
    b.applyHello(reconnected.hello!);
    const liveTail: StateFrame[] = reconnected.frames.filter((f) => f.k <= targetK);
    for (const frame of liveTail) b.applyState(frame);

    assert.equal(a.latest?.k, targetK);
    assert.equal(b.latest?.k, targetK);
    assert.deepEqual(b.trailTarget, a.trailTarget, "target trails match");
    assert.deepEqual(b.trailAgent1, a.trailAgent1, "agent1 trails match");
    assert.deepEqual(b.trailEstimate, a.trailEstimate, "estimate trails match");
    assert.deepEqual(buildScene(b, 900, 640), buildScene(a, 900, 640),
      "draw commands identical after reconnect");
  } finally {
    original.close();
    server.stop();
  }
});
