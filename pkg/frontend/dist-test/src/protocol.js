/**
 * Wire protocol with the simulation server: JSON text frames over WebSocket.
 * Everything the UI shows derives from these frames and nothing else.
 */
export const PROTOCOL_SCHEMA = 1;
const STATE_NUMBER_FIELDS = [
    "k", "x1x", "x1y", "x2x", "x2y", "sx", "sy", "shx", "shy",
    "u1x", "u1y", "u2x", "u2y", "d12", "d1s", "d2s", "hx", "hy",
    "ehat", "es", "impulse", "sat1", "sat2", "cooldown",
];
function isStateShaped(obj) {
    return STATE_NUMBER_FIELDS.every((f) => typeof obj[f] === "number" && isFinite(obj[f]));
}
/** Parse one incoming frame; null means "skip it" (malformed or unknown). */
export function parseFrame(raw) {
    let obj;
    try {
        obj = JSON.parse(raw);
    }
    catch {
        return null;
    }
    if (typeof obj !== "object" || obj === null)
        return null;
    const rec = obj;
    switch (rec.t) {
        case "state":
            return isStateShaped(rec) ? rec : null;
        case "hello":
            if (typeof rec.schema !== "number" || !Array.isArray(rec.history))
                return null;
            return rec;
        case "warning":
            return typeof rec.message === "string" ? rec : null;
        case "paused":
            return typeof rec.paused === "boolean" ? rec : null;
        case "reset":
            return { t: "reset" };
        case "lock":
            return typeof rec.steering === "boolean" ? rec : null;
        default:
            return null;
    }
}
export function steerMessage(vx, vy) {
    return JSON.stringify({ t: "steer", vx, vy });
}
export const BOOST_MESSAGE = JSON.stringify({ t: "boost" });
export const PAUSE_MESSAGE = JSON.stringify({ t: "pause" });
export const RESET_MESSAGE = JSON.stringify({ t: "reset" });
