/**
 * Client-side view of the live simulation, derived purely from received
 * frames. Reconnecting and replaying the hello history plus the live stream
 * rebuilds exactly the same state, so the UI carries no truth of its own.
 */
export const TRAIL_LENGTH = 300;
function trailPush(trail, p) {
    trail.push(p);
    if (trail.length > TRAIL_LENGTH)
        trail.splice(0, trail.length - TRAIL_LENGTH);
}
export function scoreFrame(frame, radius, prev) {
    const midX = (frame.x1x + frame.x2x) / 2;
    const midY = (frame.x1y + frame.x2y) / 2;
    const outside = Math.hypot(frame.sx - midX, frame.sy - midY) > 2 * radius;
    return {
        ticksOutside: prev.ticksOutside + (outside ? 1 : 0),
        impulsesUsed: prev.impulsesUsed + (frame.impulse ? 1 : 0),
    };
}
/** Recompute the scoreboard for a full frame list (trace replays, tests). */
export function scoreboardFromFrames(frames, radius) {
    let board = { ticksOutside: 0, impulsesUsed: 0 };
    for (const f of frames)
        board = scoreFrame(f, radius, board);
    return board;
}
export class LiveState {
    connection = "connecting";
    steering = false;
    hello = null;
    latest = null;
    lastImpulseK = -1;
    scoreboard = { ticksOutside: 0, impulsesUsed: 0 };
    warnings = [];
    paused = false;
    trailTarget = [];
    trailAgent1 = [];
    trailAgent2 = [];
    trailEstimate = [];
    applyHello(hello) {
        this.hello = hello;
        this.steering = hello.steering;
        this.resetWorld();
        for (const frame of hello.history)
            this.applyState(frame);
    }
    applyState(frame) {
        this.latest = frame;
        this.paused = frame.paused;
        trailPush(this.trailTarget, { x: frame.sx, y: frame.sy });
        trailPush(this.trailAgent1, { x: frame.x1x, y: frame.x1y });
        trailPush(this.trailAgent2, { x: frame.x2x, y: frame.x2y });
        trailPush(this.trailEstimate, { x: frame.shx, y: frame.shy });
        if (frame.impulse)
            this.lastImpulseK = frame.k;
        this.scoreboard = scoreFrame(frame, this.radius(), this.scoreboard);
    }
    /** Server-side sim restart or fresh hello: drop everything world-derived. */
    resetWorld() {
        this.latest = null;
        this.lastImpulseK = -1;
        this.scoreboard = { ticksOutside: 0, impulsesUsed: 0 };
        this.trailTarget = [];
        this.trailAgent1 = [];
        this.trailAgent2 = [];
        this.trailEstimate = [];
    }
    pushWarning(message) {
        this.warnings.push(message);
        if (this.warnings.length > 5)
            this.warnings.shift();
    }
    radius() {
        return this.hello?.radius ?? 2;
    }
    boostReady() {
        return this.steering && this.latest !== null && this.latest.cooldown === 0;
    }
    /** All world points the viewport must keep visible. */
    visiblePoints() {
        return [
            ...this.trailTarget, ...this.trailAgent1,
            ...this.trailAgent2, ...this.trailEstimate,
        ];
    }
}
