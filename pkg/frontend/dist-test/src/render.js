/**
 * Rendering is split in two: buildScene turns a LiveState into a plain list of
 * draw commands (pure, comparable in tests), drawScene executes them on a
 * canvas context. Identical states produce identical command lists, which is
 * the testable form of "the same world renders the same pixels".
 */
import { boundsOf, fitViewport, worldToScreen } from "./transform.js";
export const COLORS = {
    background: "#10141a",
    target: "#ff5c49",
    agent1: "#3fa7ff",
    agent2: "#42d4a8",
    estimate: "#ffd23f",
    orbit: "#8a93a6",
    flash: "#ffffff",
};
const IMPULSE_FLASH_TICKS = 8;
function trailCmd(points, vp, color) {
    return {
        kind: "poly",
        points: points.map((p) => worldToScreen(vp, p)),
        color,
        width: 1.5,
        fade: true,
    };
}
export function sceneViewport(state, width, height) {
    return fitViewport(boundsOf(state.visiblePoints()), width, height);
}
export function buildScene(state, width, height) {
    const cmds = [{ kind: "clear", color: COLORS.background }];
    const frame = state.latest;
    if (frame === null)
        return cmds;
    const vp = sceneViewport(state, width, height);
    cmds.push(trailCmd(state.trailTarget, vp, COLORS.target));
    cmds.push(trailCmd(state.trailAgent1, vp, COLORS.agent1));
    cmds.push(trailCmd(state.trailAgent2, vp, COLORS.agent2));
    cmds.push(trailCmd(state.trailEstimate, vp, COLORS.estimate));
    const estimate = worldToScreen(vp, { x: frame.shx, y: frame.shy });
    // the commanded circle the agents are holding around the estimate
    cmds.push({ kind: "ring", at: estimate, r: state.radius() * vp.scale,
        color: COLORS.orbit, dash: true });
    cmds.push({ kind: "ring", at: estimate, r: 5, color: COLORS.estimate, dash: false });
    cmds.push({ kind: "disc", at: worldToScreen(vp, { x: frame.x1x, y: frame.x1y }),
        r: 6, color: COLORS.agent1 });
    cmds.push({ kind: "disc", at: worldToScreen(vp, { x: frame.x2x, y: frame.x2y }),
        r: 6, color: COLORS.agent2 });
    const target = worldToScreen(vp, { x: frame.sx, y: frame.sy });
    cmds.push({ kind: "disc", at: target, r: 7, color: COLORS.target });
    if (state.lastImpulseK >= 0 && frame.k - state.lastImpulseK < IMPULSE_FLASH_TICKS) {
        const age = frame.k - state.lastImpulseK;
        cmds.push({ kind: "flash", at: target, r: 10 + 4 * age, color: COLORS.flash });
    }
    return cmds;
}
export function drawScene(ctx, cmds) {
    for (const cmd of cmds) {
        switch (cmd.kind) {
            case "clear":
                ctx.fillStyle = cmd.color;
                ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
                break;
            case "poly": {
                if (cmd.points.length < 2)
                    break;
                const n = cmd.points.length;
                for (let i = 1; i < n; i++) {
                    ctx.strokeStyle = cmd.color;
                    ctx.globalAlpha = cmd.fade ? 0.15 + 0.85 * (i / n) : 1;
                    ctx.lineWidth = cmd.width;
                    ctx.beginPath();
                    ctx.moveTo(cmd.points[i - 1].x, cmd.points[i - 1].y);
                    ctx.lineTo(cmd.points[i].x, cmd.points[i].y);
                    ctx.stroke();
                }
                ctx.globalAlpha = 1;
                break;
            }
            case "disc":
                ctx.fillStyle = cmd.color;
                ctx.beginPath();
                ctx.arc(cmd.at.x, cmd.at.y, cmd.r, 0, 2 * Math.PI);
                ctx.fill();
                break;
            case "ring":
                ctx.strokeStyle = cmd.color;
                ctx.setLineDash(cmd.dash ? [6, 6] : []);
                ctx.lineWidth = 1;
                ctx.beginPath();
                ctx.arc(cmd.at.x, cmd.at.y, cmd.r, 0, 2 * Math.PI);
                ctx.stroke();
                ctx.setLineDash([]);
                break;
            case "flash":
                ctx.strokeStyle = cmd.color;
                ctx.globalAlpha = 0.8;
                ctx.lineWidth = 2;
                ctx.beginPath();
                ctx.arc(cmd.at.x, cmd.at.y, cmd.r, 0, 2 * Math.PI);
                ctx.stroke();
                ctx.globalAlpha = 1;
                break;
        }
    }
}
