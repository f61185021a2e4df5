/**
 * World-to-screen mapping with an auto-fit that cannot jitter: instead of a
 * stateful hysteresis, the zoom snaps to discrete levels and the center to a
 * zoom-relative grid, so the transform is a pure function of the current
 * bounds. Equal trails therefore render to equal pixels, which is what lets a
 * reconnecting client reproduce the previous session's canvas exactly.
 */

import { Point } from "./state.js";

export interface Viewport {
  scale: number;   // pixels per world meter
  centerX: number; // world coords mapped to the canvas center
  centerY: number;
  width: number;   // canvas size in pixels
  height: number;
}

const ZOOM_BASE = 1.25;
const MARGIN = 0.15; // fraction of the canvas kept free around the bounds

export interface Bounds { minX: number; maxX: number; minY: number; maxY: number; }

export function boundsOf(points: Point[], fallbackHalf = 4): Bounds {
  if (points.length === 0) {
    return { minX: -fallbackHalf, maxX: fallbackHalf, minY: -fallbackHalf, maxY: fallbackHalf };
  }
  let minX = points[0].x, maxX = points[0].x;
  let minY = points[0].y, maxY = points[0].y;
  for (const p of points) {
    if (p.x < minX) minX = p.x;
    if (p.x > maxX) maxX = p.x;
    if (p.y < minY) minY = p.y;
    if (p.y > maxY) maxY = p.y;
  }
  return { minX, maxX, minY, maxY };
}

export function fitViewport(bounds: Bounds, width: number, height: number): Viewport {
  const spanX = Math.max(bounds.maxX - bounds.minX, 1e-6);
  const spanY = Math.max(bounds.maxY - bounds.minY, 1e-6);
  const usable = 1 - 2 * MARGIN;
  const raw = Math.min((width * usable) / spanX, (height * usable) / spanY);
  // snap to the zoom ladder (floor: never tighter than the raw fit)
  const level = Math.floor(Math.log(raw) / Math.log(ZOOM_BASE));
  const scale = Math.pow(ZOOM_BASE, level);
  // snap the center to a grid one canvas-percent wide at this zoom
  const grid = Math.max(width, height) / (100 * scale);
  const centerX = Math.round(((bounds.minX + bounds.maxX) / 2) / grid) * grid;
  const centerY = Math.round(((bounds.minY + bounds.maxY) / 2) / grid) * grid;
  return { scale, centerX, centerY, width, height };
}

export function worldToScreen(vp: Viewport, p: Point): Point {
  // screen y grows downward
  return {
    x: vp.width / 2 + (p.x - vp.centerX) * vp.scale,
    y: vp.height / 2 - (p.y - vp.centerY) * vp.scale,
  };
}

export function screenToWorld(vp: Viewport, p: Point): Point {
  return {
    x: vp.centerX + (p.x - vp.width / 2) / vp.scale,
    y: vp.centerY - (p.y - vp.height / 2) / vp.scale,
  };
}
