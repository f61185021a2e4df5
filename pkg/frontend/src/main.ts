/**
 * Entry point: wires the socket, keyboard/joystick input, HUD and the canvas.
 * Rendering runs at display refresh with latest-frame-wins; steering messages
 * go out at most once per server tick.
 */

import { LiveClient } from "./client.js";
import {
  directionFromKeys,
  isSteerKey,
  joystickInput,
  SendGate,
  steerVelocity,
  SteerInput,
} from "./input.js";
import {
  BOOST_MESSAGE,
  PAUSE_MESSAGE,
  RESET_MESSAGE,
  steerMessage,
} from "./protocol.js";
import { buildScene, drawScene } from "./render.js";
import { LiveState } from "./state.js";

const state = new LiveState();

// ---- DOM scaffolding --------------------------------------------------------

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K, cls: string, parent: HTMLElement): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  node.className = cls;
  parent.appendChild(node);
  return node;
}

const root = document.getElementById("app") ?? document.body;
const banner = el("div", "banner", root);
const hud = el("div", "hud", root);
const kLabel = el("span", "hud-item", hud);
const ehatLabel = el("span", "hud-item", hud);
const esLabel = el("span", "hud-item", hud);
const scoreLabel = el("span", "hud-item", hud);
const gatesBox = el("span", "gates", hud);
const canvas = el("canvas", "world", root);
canvas.width = 900;
canvas.height = 640;
const controls = el("div", "controls", root);
const boostButton = el("button", "boost", controls);
boostButton.textContent = "BOOST (space)";
const pauseButton = el("button", "pause", controls);
pauseButton.textContent = "pause";
const resetButton = el("button", "reset", controls);
resetButton.textContent = "reset";
const pad = el("div", "joypad", controls);
const knob = el("div", "joyknob", pad);
const warningsBox = el("div", "warnings", root);

const ctx = canvas.getContext("2d")!;

// ---- socket -----------------------------------------------------------------

const wsUrl = `ws://${location.host}/ws`;
const client = new LiveClient(wsUrl, {
  onStatus: (status) => {
    state.connection = status;
    if (status === "schema-mismatch") {
      banner.textContent = "protocol schema mismatch: update this page or the server";
      banner.dataset.level = "fatal";
    } else if (status === "open") {
      banner.textContent = "";
      banner.dataset.level = "ok";
    } else {
      banner.textContent = status === "retrying" ? "connection lost, retrying..." : "connecting...";
      banner.dataset.level = "warn";
    }
  },
  onFrame: (frame) => {
    switch (frame.t) {
      case "hello":
        state.applyHello(frame);
        sendGate = new SendGate(frame.tick_hz);
        renderGates();
        break;
      case "state":
        state.applyState(frame);
        break;
      case "warning":
        state.pushWarning(frame.message);
        warningsBox.textContent = state.warnings.join(" | ");
        break;
      case "paused":
        state.paused = frame.paused;
        break;
      case "reset":
        state.resetWorld();
        break;
      case "lock":
        state.steering = frame.steering;
        break;
    }
  },
});
client.connect();

// ---- input ------------------------------------------------------------------

let sendGate = new SendGate(20);
const heldKeys = new Set<string>();
let joystick: SteerInput = { direction: null, magnitude: 0, boostRequested: false };
let lastSent = "";

window.addEventListener("keydown", (ev) => {
  if (ev.code === "Space") {
    ev.preventDefault();
    requestBoost();
    return;
  }
  if (isSteerKey(ev.code)) {
    ev.preventDefault();
    heldKeys.add(ev.code);
  }
});
window.addEventListener("keyup", (ev) => {
  heldKeys.delete(ev.code);
});

function requestBoost(): void {
  if (state.boostReady()) client.send(BOOST_MESSAGE);
}

boostButton.addEventListener("click", requestBoost);
pauseButton.addEventListener("click", () => client.send(PAUSE_MESSAGE));
resetButton.addEventListener("click", () => client.send(RESET_MESSAGE));

const PAD_RADIUS = 48;
let dragging = false;
pad.addEventListener("pointerdown", (ev) => {
  dragging = true;
  pad.setPointerCapture(ev.pointerId);
});
pad.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  const rect = pad.getBoundingClientRect();
  const dx = ev.clientX - (rect.left + rect.width / 2);
  const dy = ev.clientY - (rect.top + rect.height / 2);
  const { direction, magnitude } = joystickInput(dx, dy, PAD_RADIUS);
  joystick = { direction, magnitude, boostRequested: false };
  knob.style.transform = direction === null ? "" :
    `translate(${Math.min(PAD_RADIUS, Math.hypot(dx, dy)) * direction.x}px, ` +
    `${-Math.min(PAD_RADIUS, Math.hypot(dx, dy)) * direction.y}px)`;
});
function releasePad(): void {
  dragging = false;
  joystick = { direction: null, magnitude: 0, boostRequested: false };
  knob.style.transform = "";
}
pad.addEventListener("pointerup", releasePad);
pad.addEventListener("pointercancel", releasePad);

function currentInput(): SteerInput {
  const keyDir = directionFromKeys(heldKeys);
  if (keyDir !== null) return { direction: keyDir, magnitude: 1, boostRequested: false };
  return joystick;
}

setInterval(() => {
  if (!state.steering || state.hello === null) return;
  const now = performance.now();
  const wire = steerVelocity(currentInput(), state.hello.max_manual_speed);
  const msg = steerMessage(wire.vx, wire.vy);
  // always push changes; re-push unchanged values only within the rate cap
  if (msg !== lastSent || sendGate.shouldSend(now)) {
    client.send(msg);
    lastSent = msg;
  }
}, 15);

// ---- HUD + render loop --------------------------------------------------------

function renderGates(): void {
  gatesBox.textContent = "";
  const gates = state.hello?.gates ?? {};
  for (const [name, check] of Object.entries(gates)) {
    const badge = document.createElement("span");
    badge.className = `gate gate-${check.verdict}`;
    badge.title = `${check.condition} (value ${check.value.toPrecision(4)})`;
    badge.textContent = `${name}: ${check.verdict}`;
    gatesBox.appendChild(badge);
  }
}

function tickHud(): void {
  const f = state.latest;
  if (f === null) return;
  kLabel.textContent = `k=${f.k}${state.paused ? " (paused)" : ""}${f.manual ? " manual" : ""}`;
  ehatLabel.textContent = `est err ${f.ehat.toFixed(3)} m`;
  esLabel.textContent = `as err ${f.es.toFixed(3)} m`;
  scoreLabel.textContent =
    `escape: ${state.scoreboard.ticksOutside} ticks out, ` +
    `${state.scoreboard.impulsesUsed} impulses`;
  const ready = state.boostReady();
  boostButton.disabled = !ready;
  boostButton.textContent = ready || f.cooldown === 0
    ? "BOOST (space)" : `BOOST in ${f.cooldown}`;
}

function frameLoop(): void {
  tickHud();
  drawScene(ctx, buildScene(state, canvas.width, canvas.height));
  requestAnimationFrame(frameLoop);
}
requestAnimationFrame(frameLoop);
