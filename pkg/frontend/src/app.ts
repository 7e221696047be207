// Browser entry point: wires the reducer, the WebSocket client, the virtual
// joystick, the solvent/mating panels and the canvas renderer together.
// Everything stateful funnels through dispatch(); this file owns the DOM.

import { CockpitClient } from "./net.js";
import { JoystickSource, SAMPLE_INTERVAL_MS } from "./joystick.js";
import { joystickCommand, simpleCommand } from "./protocol.js";
import { attemptDetach, matingBadge, presetCommand, SOLVENT_PRESETS } from "./panels.js";
import { Canvas2D, drawScene, solventGaugeText } from "./render.js";
import { canSendCommands, CockpitEvent, CockpitState, initialState, reduce } from "./state.js";

let state: CockpitState = initialState();

let lastFrameAt = 0;

function dispatch(e: CockpitEvent): void {
    state = reduce(state, e);
    if (e.kind === "frame") lastFrameAt = performance.now();
    syncDom();
}

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const bannerEl = document.getElementById("banner")!;
const gaugeEl = document.getElementById("gauge")!;
const matingEl = document.getElementById("mating")!;
const toastsEl = document.getElementById("toasts")!;
const solventEl = document.getElementById("solvent")!;
const stick = document.getElementById("stick") as HTMLDivElement;
const knob = document.getElementById("knob") as HTMLDivElement;

const params = new URLSearchParams(location.search);
const url = params.get("ws") ?? `ws://${location.hostname || "127.0.0.1"}:8765`;
const client = new CockpitClient(url, dispatch, { role: "driver" });
const joystick = new JoystickSource();

// ---------------------------------------------------------------- input

let dragging = false;

function stickFromPointer(ev: PointerEvent): void {
    const rect = stick.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) / rect.width) * 2 - 1;
    const y = ((ev.clientY - rect.top) / rect.height) * 2 - 1;
    joystick.setStick(x, y);
    knob.style.left = `${(Math.max(-1, Math.min(1, x)) * 0.5 + 0.5) * 100}%`;
    knob.style.top = `${(Math.max(-1, Math.min(1, y)) * 0.5 + 0.5) * 100}%`;
}

stick.addEventListener("pointerdown", (ev) => {
    dragging = true;
    stick.setPointerCapture(ev.pointerId);
    stickFromPointer(ev);
});
stick.addEventListener("pointermove", (ev) => {
    if (dragging) stickFromPointer(ev);
});
const endDrag = () => {
    dragging = false;
    joystick.releaseStick();
    knob.style.left = "50%";
    knob.style.top = "50%";
};
stick.addEventListener("pointerup", endDrag);
stick.addEventListener("pointercancel", endDrag);

document.addEventListener("keydown", (ev) => {
    if (joystick.keyEvent(ev.code, true)) ev.preventDefault();
});
document.addEventListener("keyup", (ev) => {
    if (joystick.keyEvent(ev.code, false)) ev.preventDefault();
});

setInterval(() => {
    const input = joystick.sample();
    if (input !== null && canSendCommands(state)) {
        client.sendCommand((seq) => joystickCommand(seq, input));
    }
}, SAMPLE_INTERVAL_MS);

// camera pan/zoom
canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    dispatch({ kind: "zoom", factor: ev.deltaY < 0 ? 1.15 : 1 / 1.15 });
});
let panning: [number, number] | null = null;
canvas.addEventListener("pointerdown", (ev) => {
    panning = [ev.clientX, ev.clientY];
});
canvas.addEventListener("pointermove", (ev) => {
    if (!panning) return;
    dispatch({ kind: "pan", dxPx: ev.clientX - panning[0], dyPx: ev.clientY - panning[1] });
    panning = [ev.clientX, ev.clientY];
});
canvas.addEventListener("pointerup", () => (panning = null));

// ---------------------------------------------------------------- panels

for (const preset of SOLVENT_PRESETS) {
    const button = document.createElement("button");
    button.textContent = preset.label;
    button.addEventListener("click", () => {
        if (canSendCommands(state)) client.sendCommand((seq) => presetCommand(seq, preset));
    });
    solventEl.appendChild(button);
}

const pauseButton = document.createElement("button");
pauseButton.textContent = "pause/resume";
pauseButton.addEventListener("click", () => {
    const kind = state.frame?.paused ? "resume" : "pause";
    client.sendCommand((seq) => simpleCommand(seq, kind));
});
solventEl.appendChild(pauseButton);

function renderMatingPanel(): void {
    matingEl.textContent = "";
    if (!state.frame) return;
    for (const status of state.frame.mating) {
        const badge = matingBadge(status);
        const row = document.createElement("div");
        row.className = "badge";
        row.textContent =
            `${badge.pair}: ${badge.state}` +
            ` | insert ${badge.canInsert ? "Y" : "n"}` +
            ` | lock ${badge.interferenceLocked ? "Y" : "n"}` +
            (badge.gripperState ? ` | jaws ${badge.gripperState}` : "") +
            (badge.wallConstrained !== null ? ` | walls ${badge.wallConstrained ? "Y" : "n"}` : "");
        const detach = document.createElement("button");
        detach.textContent = "detach";
        detach.addEventListener("click", () => {
            const attempt = attemptDetach(status);
            if ("refusal" in attempt) {
                dispatch({ kind: "toast", text: `detach refused: ${attempt.refusal}`, atMs: Date.now() });
            } else if (canSendCommands(state)) {
                client.sendCommand(attempt.send);
            }
        });
        row.appendChild(detach);
        matingEl.appendChild(row);
    }
}

// ---------------------------------------------------------------- output

function syncDom(): void {
    statusEl.textContent = `${state.connection}${state.role ? " (" + state.role + ")" : ""}` +
        (state.scenario ? ` — ${state.scenario}` : "");
    bannerEl.style.display = state.connection === "version_mismatch" ? "block" : "none";
    if (state.frame && state.overlays.solventGauge) {
        gaugeEl.textContent = solventGaugeText(state.frame) +
            ` | t=${state.frame.time_s.toFixed(2)}s` +
            ` | ${state.frame.tick_rate_actual_hz.toFixed(0)} ticks/s` +
            (state.frame.paused ? " | PAUSED" : "");
    }
    renderMatingPanel();
    toastsEl.textContent = state.toasts.map((t) => t.text).join(" • ");
}

function animate(): void {
    const frameAge = (performance.now() - lastFrameAt) / 33.3;
    drawScene(ctx as unknown as Canvas2D, state, Math.min(1, frameAge));
    requestAnimationFrame(animate);
}
setInterval(() => dispatch({ kind: "expireToasts", nowMs: Date.now() }), 1000);

client.connect();
requestAnimationFrame(animate);
