import assert from "node:assert/strict";
import { test } from "node:test";
import { buildScene } from "../src/render.js";
import { LiveState } from "../src/state.js";
import { makeFrame, makeHello } from "./helpers.js";
function runStream(frames) {
    const state = new LiveState();
    state.applyHello(makeHello());
    for (const f of frames)
        state.applyState(f);
    return state;
}
test("empty state renders only the clear", () => {
    const state = new LiveState();
    const cmds = buildScene(state, 800, 600);
    assert.equal(cmds.length, 1);
    assert.equal(cmds[0].kind, "clear");
});
test("scene contains trails, orbit ring, entities and estimate marker", () => {
    const state = runStream([makeFrame(0), makeFrame(1, { sx: 0.5 })]);
    const cmds = buildScene(state, 800, 600);
    const kinds = cmds.map((c) => c.kind);
    assert.equal(kinds.filter((k) => k === "poly").length, 4); // four trails
    assert.equal(kinds.filter((k) => k === "disc").length, 3); // two agents + target
    assert.ok(kinds.includes("ring")); // commanded circle
});
test("impulse flash appears and fades out", () => {
    const state = runStream([makeFrame(0), makeFrame(1, { impulse: 1 })]);
    assert.ok(buildScene(state, 800, 600).some((c) => c.kind === "flash"));
    for (let k = 2; k < 20; k++)
        state.applyState(makeFrame(k));
    assert.ok(!buildScene(state, 800, 600).some((c) => c.kind === "flash"));
});
test("scene generation is pure: same state, same commands", () => {
    const state = runStream([makeFrame(0), makeFrame(1, { sx: 1.0, sy: -0.5 })]);
    assert.deepEqual(buildScene(state, 800, 600), buildScene(state, 800, 600));
});
test("a reconnected client renders the identical scene", () => {
    // the statelessness contract at the draw-command level: identical commands
    // imply identical pixels (antialiasing aside)
    const frames = Array.from({ length: 140 }, (_, k) => makeFrame(k, {
        sx: 0.3 * k * Math.cos(k / 9), sy: 0.25 * k * Math.sin(k / 11),
        x1x: Math.sin(k / 8) * 2, x1y: Math.cos(k / 8) * 2,
        x2x: -Math.sin(k / 8) * 2, x2y: -Math.cos(k / 8) * 2,
        shx: 0.29 * k * Math.cos(k / 9), shy: 0.24 * k * Math.sin(k / 11),
        impulse: k % 35 === 0 ? 1 : 0,
    }));
    const original = runStream(frames);
    const reconnected = new LiveState();
    // server replays the recent window in the hello, then the live stream resumes
    reconnected.applyHello(makeHello({ history: frames.slice(0, 90) }));
    for (const f of frames.slice(90))
        reconnected.applyState(f);
    assert.deepEqual(buildScene(reconnected, 800, 600), buildScene(original, 800, 600));
});
