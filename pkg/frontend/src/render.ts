// Canvas rendering of telemetry: µm -> pixel affine camera, body outlines
// straight from the wire (no client-side geometry), swelling heat tint,
// mating badges.  Helpers are pure for testability.

import { OutlinePiece, TelemetryBody, TelemetryFrame } from "./protocol.js";
import { Camera, CockpitState, interpolatedBodies } from "./state.js";

export function worldToScreen(
    cam: Camera,
    w: number,
    h: number,
    x: number,
    y: number,
): [number, number] {
    // +y up in the channel, +y down on canvas
    return [w / 2 + (x - cam.cx) * cam.pxPerUm, h / 2 - (y - cam.cy) * cam.pxPerUm];
}

// Swelling heat tint: shrunken parts go blue, swollen go red, lam = 1 neutral.
export function lamTint(lam: number): string {
    const t = Math.max(-1, Math.min(1, (lam - 1.0) * 4.0));
    const r = Math.round(150 + 90 * Math.max(0, t));
    const b = Math.round(150 + 90 * Math.max(0, -t));
    return `rgb(${r},140,${b})`;
}

const KIND_FILL: Record<string, string> = {
    Wall: "#555a63",
    Sphere: "#caa94b",
};

export function bodyFill(body: TelemetryBody): string {
    return KIND_FILL[body.kind] ?? lamTint(body.lam);
}

export interface Canvas2D {
    canvas: { width: number; height: number };
    clearRect(x: number, y: number, w: number, h: number): void;
    beginPath(): void;
    moveTo(x: number, y: number): void;
    lineTo(x: number, y: number): void;
    arc(x: number, y: number, r: number, a0: number, a1: number): void;
    closePath(): void;
    fill(): void;
    stroke(): void;
    fillText(text: string, x: number, y: number): void;
    fillStyle: string | CanvasGradient | CanvasPattern;
    strokeStyle: string | CanvasGradient | CanvasPattern;
    lineWidth: number;
    font: string;
    globalAlpha: number;
}

function tracePiece(ctx: Canvas2D, cam: Camera, w: number, h: number, piece: OutlinePiece): void {
    ctx.beginPath();
    if ("poly" in piece) {
        piece.poly.forEach(([x, y], i) => {
            const [sx, sy] = worldToScreen(cam, w, h, x, y);
            if (i === 0) ctx.moveTo(sx, sy);
            else ctx.lineTo(sx, sy);
        });
        ctx.closePath();
    } else {
        const [cx, cy, r] = piece.circle;
        const [sx, sy] = worldToScreen(cam, w, h, cx, cy);
        ctx.arc(sx, sy, r * cam.pxPerUm, 0, Math.PI * 2);
    }
}

export function drawScene(ctx: Canvas2D, state: CockpitState, blend = 1): void {
    const w = ctx.canvas.width;
    const h = ctx.canvas.height;
    ctx.clearRect(0, 0, w, h);
    const frame = state.frame;
    if (!frame) return;
    const cam = state.camera;

    if (state.overlays.trajectories) {
        ctx.lineWidth = 1;
        ctx.strokeStyle = "#3b88c3";
        ctx.globalAlpha = 0.6;
        for (const points of state.trail.values()) {
            if (points.length < 2) continue;
            ctx.beginPath();
            points.forEach(([x, y], i) => {
                const [sx, sy] = worldToScreen(cam, w, h, x, y);
                if (i === 0) ctx.moveTo(sx, sy);
                else ctx.lineTo(sx, sy);
            });
            ctx.stroke();
        }
        ctx.globalAlpha = 1;
    }

    for (const body of interpolatedBodies(state, blend)) {
        ctx.fillStyle = bodyFill(body);
        ctx.strokeStyle = "#20242b";
        ctx.lineWidth = 1;
        for (const piece of body.outline) {
            tracePiece(ctx, cam, w, h, piece);
            ctx.fill();
            ctx.stroke();
        }
        if (state.overlays.badges) {
            const [sx, sy] = worldToScreen(cam, w, h, body.x, body.y);
            ctx.fillStyle = "#e8e8e8";
            ctx.font = "11px monospace";
            ctx.fillText(body.id, sx + 4, sy - 4);
        }
    }
}

export function solventGaugeText(frame: TelemetryFrame): string {
    const phi = frame.water_fraction;
    const target = frame.water_fraction_target;
    return `water ${(phi * 100).toFixed(1)}% -> ${(target * 100).toFixed(0)}%`;
}
