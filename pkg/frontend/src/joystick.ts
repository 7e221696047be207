// Virtual joystick: an on-screen stick plus arrow-key / Q-E rotation
// bindings.  The sampler runs at a fixed cadence (>= 10 Hz) while engaged;
// releasing the stick emits exactly one zero command and then goes quiet.

import { COIL_LIMIT_T_PER_M, JoystickInput } from "./protocol.js";

export const SAMPLE_INTERVAL_MS = 50; // 20 Hz
export const ROTATE_RATE_RAD_S = 1.0;

interface Keys {
    up: boolean;
    down: boolean;
    left: boolean;
    right: boolean;
    ccw: boolean;
    cw: boolean;
}

export class JoystickSource {
    private stickX = 0; // [-1, 1]
    private stickY = 0;
    private keys: Keys = { up: false, down: false, left: false, right: false, ccw: false, cw: false };
    private zeroPending = false;

    setStick(x: number, y: number): void {
        this.stickX = Math.max(-1, Math.min(1, x));
        this.stickY = Math.max(-1, Math.min(1, y));
    }

    releaseStick(): void {
        if (this.stickX !== 0 || this.stickY !== 0) this.zeroPending = true;
        this.stickX = 0;
        this.stickY = 0;
    }

    keyEvent(code: string, down: boolean): boolean {
        const map: Record<string, keyof Keys> = {
            ArrowUp: "up",
            ArrowDown: "down",
            ArrowLeft: "left",
            ArrowRight: "right",
            KeyQ: "ccw",
            KeyE: "cw",
        };
        const key = map[code];
        if (key === undefined) return false;
        if (this.keys[key] && !down) this.zeroPending = true;
        this.keys[key] = down;
        return true;
    }

    engaged(): boolean {
        const k = this.keys;
        return (
            this.stickX !== 0 || this.stickY !== 0 ||
            k.up || k.down || k.left || k.right || k.ccw || k.cw
        );
    }

    // Current command, or null when idle and the release zero was already
    // emitted.  Call at a fixed >= 10 Hz cadence.
    sample(): JoystickInput | null {
        if (this.engaged()) {
            const k = this.keys;
            const gx = (this.stickX + (k.right ? 1 : 0) - (k.left ? 1 : 0)) * COIL_LIMIT_T_PER_M;
            const gy = (-this.stickY + (k.up ? 1 : 0) - (k.down ? 1 : 0)) * COIL_LIMIT_T_PER_M;
            const rot = ((k.ccw ? 1 : 0) - (k.cw ? 1 : 0)) * ROTATE_RATE_RAD_S;
            return { gradX: gx, gradY: gy, rotateRate: rot };
        }
        if (this.zeroPending) {
            this.zeroPending = false;
            return { gradX: 0, gradY: 0, rotateRate: 0 };
        }
        return null;
    }
}
