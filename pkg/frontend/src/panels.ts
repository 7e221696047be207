// Solvent presets and the mating panel: pure helpers that turn panel
// interactions into protocol commands and telemetry into badge view-models.

import { MatingStatus, solventCommand } from "./protocol.js";

export interface SolventPreset {
    label: string;
    phi: number;
}

export const SOLVENT_PRESETS: SolventPreset[] = [
    { label: "Pure water (phi=1.00)", phi: 1.0 },
    { label: "40% water (phi=0.40)", phi: 0.4 },
    { label: "Pure EL (phi=0.00)", phi: 0.0 },
];

export function presetCommand(seq: number, preset: SolventPreset): string {
    return solventCommand(seq, preset.phi);
}

export interface MatingBadge {
    pair: string;
    state: string; // FSM enum value, verbatim
    canInsert: boolean;
    interferenceLocked: boolean;
    gripperState: string | null;
    wallConstrained: boolean | null;
    detachFeasible: boolean;
    detachReason: string | null;
}

export function matingBadge(m: MatingStatus): MatingBadge {
    const g = m.guards;
    return {
        pair: `${m.base} + ${m.effector}`,
        state: m.state,
        canInsert: g.can_insert === true,
        interferenceLocked: g.interference_locked === true,
        gripperState: typeof g.gripper_state === "string" ? g.gripper_state : null,
        wallConstrained:
            typeof g.wall_constrained === "boolean" ? g.wall_constrained : null,
        detachFeasible: g.detach_feasible === true,
        detachReason: typeof g.detach_reason === "string" ? g.detach_reason : null,
    };
}

export type DetachAttempt =
    | { send: (seq: number) => string }
    | { refusal: string };

// The detach button triggers the solvent switch that starts the detach
// workflow, unless the service already reports the pair infeasible (a pinned
// pair with no constraint walls); then the refusal reason surfaces as a toast.
export function attemptDetach(m: MatingStatus): DetachAttempt {
    const g = m.guards;
    if (
        (m.state === "DetachPending" || m.state === "Locked") &&
        g.detach_feasible === false &&
        typeof g.detach_reason === "string" &&
        g.detach_reason !== "GripperClosed" &&
        g.detach_reason !== "PinEngaged"
    ) {
        return { refusal: g.detach_reason };
    }
    return { send: (seq: number) => solventCommand(seq, 1.0) };
}
