/**
 * Operator input: arrow keys / WASD plus an on-screen joystick, reduced to a
 * unit direction and a magnitude fraction. Outgoing steer messages are capped
 * at the server tick rate so holding a key never floods the socket.
 */
const KEY_VECTORS = {
    ArrowUp: [0, 1], KeyW: [0, 1],
    ArrowDown: [0, -1], KeyS: [0, -1],
    ArrowLeft: [-1, 0], KeyA: [-1, 0],
    ArrowRight: [1, 0], KeyD: [1, 0],
};
export function isSteerKey(code) {
    return code in KEY_VECTORS;
}
/** Combine currently held keys into a unit direction (null when idle). */
export function directionFromKeys(held) {
    let x = 0;
    let y = 0;
    for (const code of held) {
        const v = KEY_VECTORS[code];
        if (v) {
            x += v[0];
            y += v[1];
        }
    }
    const n = Math.hypot(x, y);
    if (n === 0)
        return null;
    return { x: x / n, y: y / n };
}
/** Joystick drag offset -> direction + magnitude, clamped to the pad radius. */
export function joystickInput(dx, dy, padRadius) {
    const n = Math.hypot(dx, dy);
    if (n < padRadius * 0.1)
        return { direction: null, magnitude: 0 }; // dead zone
    const clamped = Math.min(n, padRadius);
    // screen y points down; world y points up
    return { direction: { x: dx / n, y: -dy / n }, magnitude: clamped / padRadius };
}
/** Client-side rate cap: at most one send per tick interval. */
export class SendGate {
    intervalMs;
    lastSend = -Infinity;
    constructor(tickHz) {
        this.intervalMs = 1000 / tickHz;
    }
    shouldSend(nowMs) {
        if (nowMs - this.lastSend >= this.intervalMs) {
            this.lastSend = nowMs;
            return true;
        }
        return false;
    }
}
/** Velocity to put on the wire (server clamps again; null direction = stop). */
export function steerVelocity(input, maxSpeed) {
    if (input.direction === null)
        return { vx: null, vy: null };
    return {
        vx: input.direction.x * input.magnitude * maxSpeed,
        vy: input.direction.y * input.magnitude * maxSpeed,
    };
}
