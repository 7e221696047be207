import { describe, expect, it } from "vitest";

import { JoystickSource } from "../src/joystick.js";
import { COIL_LIMIT_T_PER_M } from "../src/protocol.js";

describe("joystick source", () => {
    it("centered stick samples nothing once settled", () => {
        const j = new JoystickSource();
        expect(j.sample()).toBeNull();
    });

    it("full right maps to the coil limit", () => {
        const j = new JoystickSource();
        j.setStick(1, 0);
        const input = j.sample();
        expect(input?.gradX).toBe(COIL_LIMIT_T_PER_M);
        expect(input?.gradY ?? 1).toBeCloseTo(0, 12);
    });

    it("screen-up stick pushes +y in the world", () => {
        const j = new JoystickSource();
        j.setStick(0, -1); // pointer up
        expect(j.sample()?.gradY).toBe(COIL_LIMIT_T_PER_M);
    });

    it("keeps emitting while engaged (>= 10 Hz cadence is caller-driven)", () => {
        const j = new JoystickSource();
        j.setStick(0.5, 0);
        expect(j.sample()).not.toBeNull();
        expect(j.sample()).not.toBeNull();
        expect(j.engaged()).toBe(true);
    });

    it("release emits exactly one zero command", () => {
        const j = new JoystickSource();
        j.setStick(1, 0);
        j.sample();
        j.releaseStick();
        const zero = j.sample();
        expect(zero).toEqual({ gradX: 0, gradY: 0, rotateRate: 0 });
        expect(j.sample()).toBeNull();
    });

    it("arrow keys and QE rotation", () => {
        const j = new JoystickSource();
        expect(j.keyEvent("ArrowRight", true)).toBe(true);
        expect(j.keyEvent("KeyQ", true)).toBe(true);
        const input = j.sample();
        expect(input?.gradX).toBe(COIL_LIMIT_T_PER_M);
        expect(input?.rotateRate).toBeGreaterThan(0);
        j.keyEvent("ArrowRight", false);
        j.keyEvent("KeyQ", false);
        const zero = j.sample();
        expect(zero).toEqual({ gradX: 0, gradY: 0, rotateRate: 0 });
        expect(j.sample()).toBeNull();
        expect(j.keyEvent("KeyZ", true)).toBe(false); // unbound keys ignored
    });

    it("stick and keys combine and clamp", () => {
        const j = new JoystickSource();
        j.setStick(1, 0);
        j.keyEvent("ArrowRight", true);
        const input = j.sample()!;
        expect(input.gradX).toBe(2 * COIL_LIMIT_T_PER_M); // clamped later at send
    });
});
