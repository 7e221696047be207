// Cockpit view-model: a single pure reducer over network and UI events.
// Physics never runs client-side; the state holds the latest telemetry frame
// (plus the previous one for one frame of linear interpolation) and UI bits.

import { ErrorFrame, HelloAck, TelemetryFrame } from "./protocol.js";

export type ConnectionStatus =
    | "idle"
    | "connecting"
    | "connected"
    | "version_mismatch"
    | "disconnected";

export interface Camera {
    cx: number; // world µm at canvas center
    cy: number;
    pxPerUm: number;
}

export interface Toast {
    text: string;
    atMs: number;
}

export interface CockpitState {
    connection: ConnectionStatus;
    role: "driver" | "viewer" | null;
    scenario: string | null;
    frame: TelemetryFrame | null;
    prevFrame: TelemetryFrame | null;
    camera: Camera;
    overlays: { trajectories: boolean; badges: boolean; solventGauge: boolean };
    trail: Map<string, [number, number][]>;
    toasts: Toast[];
    lastError: string | null;
}

export type CockpitEvent =
    | { kind: "connecting" }
    | { kind: "ack"; ack: HelloAck }
    | { kind: "frame"; frame: TelemetryFrame }
    | { kind: "serverError"; frame: ErrorFrame }
    | { kind: "closed" }
    | { kind: "pan"; dxPx: number; dyPx: number }
    | { kind: "zoom"; factor: number }
    | { kind: "toggleOverlay"; name: keyof CockpitState["overlays"] }
    | { kind: "toast"; text: string; atMs: number }
    | { kind: "expireToasts"; nowMs: number };

const TRAIL_POINTS = 400;
export const TOAST_LIFETIME_MS = 5000;

export function initialState(): CockpitState {
    return {
        connection: "idle",
        role: null,
        scenario: null,
        frame: null,
        prevFrame: null,
        camera: { cx: 600, cy: 400, pxPerUm: 0.9 },
        overlays: { trajectories: true, badges: true, solventGauge: true },
        trail: new Map(),
        toasts: [],
        lastError: null,
    };
}

export function reduce(s: CockpitState, e: CockpitEvent): CockpitState {
    switch (e.kind) {
        case "connecting":
            return { ...s, connection: "connecting", role: null };
        case "ack":
            return {
                ...s,
                connection: "connected",
                role: e.ack.role_granted,
                scenario: e.ack.scenario,
                lastError: null,
            };
        case "frame": {
            // frames must be monotone in time; drop anything stale
            if (s.frame && e.frame.time_s < s.frame.time_s) return s;
            const trail = s.overlays.trajectories ? extendTrail(s.trail, e.frame) : s.trail;
            return { ...s, prevFrame: s.frame, frame: e.frame, trail };
        }
        case "serverError":
            if (e.frame.code === "VersionMismatch") {
                return { ...s, connection: "version_mismatch", lastError: e.frame.detail };
            }
            return { ...s, lastError: `${e.frame.code}: ${e.frame.detail}` };
        case "closed":
            if (s.connection === "version_mismatch") return s; // banner stays
            return { ...s, connection: "disconnected", role: null };
        case "pan":
            return {
                ...s,
                camera: {
                    ...s.camera,
                    cx: s.camera.cx - e.dxPx / s.camera.pxPerUm,
                    cy: s.camera.cy + e.dyPx / s.camera.pxPerUm,
                },
            };
        case "zoom": {
            const pxPerUm = Math.min(8, Math.max(0.05, s.camera.pxPerUm * e.factor));
            return { ...s, camera: { ...s.camera, pxPerUm } };
        }
        case "toggleOverlay":
            return { ...s, overlays: { ...s.overlays, [e.name]: !s.overlays[e.name] } };
        case "toast":
            return { ...s, toasts: [...s.toasts, { text: e.text, atMs: e.atMs }] };
        case "expireToasts":
            return { ...s, toasts: s.toasts.filter((t) => e.nowMs - t.atMs < TOAST_LIFETIME_MS) };
        default:
            return s;
    }
}

function extendTrail(
    trail: Map<string, [number, number][]>,
    frame: TelemetryFrame,
): Map<string, [number, number][]> {
    const next = new Map(trail);
    for (const body of frame.bodies) {
        if (body.kind === "Wall" || body.kind === "Sphere") continue;
        const points = [...(next.get(body.id) ?? []), [body.x, body.y] as [number, number]];
        if (points.length > TRAIL_POINTS) points.shift();
        next.set(body.id, points);
    }
    return next;
}

// Commands are only ever emitted from a healthy driver session.
export function canSendCommands(s: CockpitState): boolean {
    return s.connection === "connected" && s.role === "driver";
}

// One frame of linear interpolation for rendering; never extrapolates.
export function interpolatedBodies(s: CockpitState, blend: number): TelemetryFrame["bodies"] {
    if (!s.frame) return [];
    if (!s.prevFrame || blend >= 1) return s.frame.bodies;
    const t = Math.max(0, Math.min(1, blend));
    const prev = new Map(s.prevFrame.bodies.map((b) => [b.id, b]));
    return s.frame.bodies.map((b) => {
        const p = prev.get(b.id);
        if (!p) return b;
        return {
            ...b,
            x: p.x + (b.x - p.x) * t,
            y: p.y + (b.y - p.y) * t,
            theta: p.theta + (b.theta - p.theta) * t,
        };
    });
}
