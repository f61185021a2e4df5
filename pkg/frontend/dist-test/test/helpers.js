/** Shared test utilities: frame fabrication and a live server harness. */
import { spawn } from "node:child_process";
import path from "node:path";
import WebSocket from "ws";
export function makeFrame(k, over = {}) {
    return {
        t: "state", k,
        x1x: 0, x1y: 1.2, x2x: 0, x2y: 2.4,
        sx: 0, sy: 0, shx: 0, shy: 0,
        u1x: 0, u1y: 0, u2x: 0, u2y: 0,
        d12: 1.2, d1s: 1.2, d2s: 2.4,
        hx: 0, hy: 0, ehat: 0, es: 3.6,
        impulse: 0, sat1: 0, sat2: 0,
        cooldown: 0, paused: false, manual: false,
        ...over,
    };
}
export function makeHello(over = {}) {
    return {
        t: "hello", schema: 1, config: {}, seed: 0, tick_hz: 100,
        max_manual_speed: 0.5, gap_min: 20, radius: 2,
        gates: {}, steering: true, history: [],
        ...over,
    };
}
/** Start the simulation server CLI on an ephemeral port and wait for it. */
export function startServer(extraArgs = []) {
    const repoRoot = path.resolve(process.cwd(), "..");
    const proc = spawn("python3", ["-m", "encirclesim", "serve", "--bind", "127.0.0.1:0",
        "--tick-hz", "100", ...extraArgs], {
        cwd: repoRoot,
        env: { ...process.env, PYTHONPATH: path.join(repoRoot, "src") },
        stdio: ["ignore", "pipe", "pipe"],
    });
    return new Promise((resolve, reject) => {
        let buffer = "";
        const timer = setTimeout(() => {
            proc.kill();
            reject(new Error(`server did not start; output so far: ${buffer}`));
        }, 15000);
        proc.stdout.on("data", (chunk) => {
            buffer += chunk.toString();
            const match = buffer.match(/listening on (ws:\/\/[^\s]+)/);
            if (match) {
                clearTimeout(timer);
                resolve({ proc, url: match[1], stop: () => proc.kill() });
            }
        });
        proc.stderr.on("data", (chunk) => { buffer += chunk.toString(); });
        proc.on("exit", (code) => {
            clearTimeout(timer);
            reject(new Error(`server exited early (${code}): ${buffer}`));
        });
    });
}
/** A scripted protocol client for driving the live loop from tests. */
export class ScriptedClient {
    ws;
    hello = null;
    frames = [];
    waiters = [];
    constructor(url) {
        this.ws = new WebSocket(url);
        this.ws.on("message", (data) => {
            const obj = JSON.parse(data.toString());
            if (obj.t === "hello")
                this.hello = obj;
            if (obj.t === "state")
                this.frames.push(obj);
            for (const wake of this.waiters.splice(0))
                wake();
        });
    }
    async connected() {
        if (this.ws.readyState === WebSocket.OPEN)
            return;
        await new Promise((res, rej) => {
            this.ws.once("open", res);
            this.ws.once("error", rej);
        });
    }
    /** Wait until pred() is true, re-checking on every incoming frame. */
    async until(pred, timeoutMs = 20000) {
        const deadline = Date.now() + timeoutMs;
        while (!pred()) {
            if (Date.now() > deadline)
                throw new Error("timed out waiting for condition");
            await new Promise((res) => {
                const t = setTimeout(res, 250);
                this.waiters.push(() => { clearTimeout(t); res(); });
            });
        }
    }
    send(obj) {
        this.ws.send(JSON.stringify(obj));
    }
    close() {
        this.ws.close();
    }
}
