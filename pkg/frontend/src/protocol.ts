// Wire types for the teleop service (see docs/protocol.md in the repo root).
// One JSON object per WebSocket text frame; schema_version must match exactly.

export const SCHEMA_VERSION = 1;
export const COIL_LIMIT_T_PER_M = 2.0;

export type OutlinePiece =
    | { poly: [number, number][] }
    | { circle: [number, number, number] };

export interface TelemetryBody {
    id: string;
    kind: string;
    x: number;
    y: number;
    theta: number;
    lam: number;
    outline: OutlinePiece[];
    aperture_um?: number;
    gripper_state?: string;
}

export interface MatingStatus {
    base: string;
    effector: string;
    state: string;
    guards: Record<string, unknown>;
}

export interface TelemetryFrame {
    type: "telemetry";
    schema_version: number;
    time_s: number;
    tick_rate_actual_hz: number;
    paused: boolean;
    water_fraction: number;
    water_fraction_target: number;
    driver_held: boolean;
    bodies: TelemetryBody[];
    mating: MatingStatus[];
}

export interface HelloAck {
    type: "hello_ack";
    schema_version: number;
    role_granted: "driver" | "viewer";
    seed: number;
    scenario: string;
}

export interface ErrorFrame {
    type: "error";
    schema_version: number;
    code: string;
    detail: string;
}

export type ServerMessage = TelemetryFrame | HelloAck | ErrorFrame;

export function parseServerMessage(raw: string): ServerMessage | null {
    let msg: unknown;
    try {
        msg = JSON.parse(raw);
    } catch {
        return null;
    }
    if (typeof msg !== "object" || msg === null) return null;
    const type = (msg as { type?: unknown }).type;
    if (type === "telemetry" || type === "hello_ack" || type === "error") {
        return msg as ServerMessage;
    }
    return null;
}

export function helloMessage(role: "driver" | "viewer", version = SCHEMA_VERSION): string {
    return JSON.stringify({ type: "hello", schema_version: version, role });
}

export interface JoystickInput {
    gradX: number;
    gradY: number;
    rotateRate: number;
}

// Saturate the gradient vector at the coil limit; the service clamps again
// server-side, this keeps the UI honest about what will actually happen.
export function clampGradient(gx: number, gy: number, limit = COIL_LIMIT_T_PER_M): [number, number] {
    const mag = Math.hypot(gx, gy);
    if (mag <= limit || mag === 0) return [gx, gy];
    const s = limit / mag;
    return [gx * s, gy * s];
}

export function joystickCommand(seq: number, input: JoystickInput, base?: string): string {
    const [gx, gy] = clampGradient(input.gradX, input.gradY);
    const msg: Record<string, unknown> = {
        type: "command",
        client_seq: seq,
        kind: "joystick",
        grad_x: gx,
        grad_y: gy,
        rotate_rate: input.rotateRate,
    };
    if (base !== undefined) msg.base = base;
    return JSON.stringify(msg);
}

export function solventCommand(seq: number, phi: number): string {
    return JSON.stringify({ type: "command", client_seq: seq, kind: "solvent_target", phi });
}

export function simpleCommand(seq: number, kind: string): string {
    return JSON.stringify({ type: "command", client_seq: seq, kind });
}
