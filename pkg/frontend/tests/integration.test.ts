// Integration against the live Python teleop service: driver-token
// exclusivity, version-mismatch blocking, replay-log equivalence, and
// reconnect after a service restart.  Requires the microforge package to be
// installed in the ambient Python environment (pip install -e ..).

import { ChildProcess, execFile, spawn } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterEach, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { CockpitClient, WebSocketLike } from "../src/net.js";
import { joystickCommand, TelemetryFrame } from "../src/protocol.js";
import { CockpitEvent } from "../src/state.js";

const REPO_ROOT = resolve(fileURLToPath(new URL(".", import.meta.url)), "../..");
const PYTHON = process.env.PYTHON ?? "python3";

const wsFactory = (url: string): WebSocketLike => new WebSocket(url) as unknown as WebSocketLike;

interface Service {
    proc: ChildProcess;
    port: number;
    url: string;
}

let running: Service[] = [];

function startService(args: string[] = [], port = 0): Promise<Service> {
    return new Promise((resolvePromise, reject) => {
        const proc = spawn(
            PYTHON,
            ["-m", "microforge.cli", "serve", "--scenario", "teleop_default", "--port", String(port), ...args],
            { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
        );
        let out = "";
        const timer = setTimeout(() => reject(new Error(`service did not start: ${out}`)), 15000);
        proc.stdout!.on("data", (chunk) => {
            out += String(chunk);
            const m = out.match(/listening on ws:\/\/[\d.]+:(\d+)/);
            if (m) {
                clearTimeout(timer);
                const svc = { proc, port: Number(m[1]), url: `ws://127.0.0.1:${m[1]}` };
                running.push(svc);
                resolvePromise(svc);
            }
        });
        proc.stderr!.on("data", (chunk) => (out += String(chunk)));
        proc.on("exit", (code) => {
            if (!out.includes("listening")) reject(new Error(`service exited ${code}: ${out}`));
        });
    });
}

function stopService(svc: Service): Promise<void> {
    return new Promise((resolvePromise) => {
        svc.proc.on("exit", () => resolvePromise());
        svc.proc.kill("SIGTERM");
        setTimeout(() => svc.proc.kill("SIGKILL"), 3000).unref();
    });
}

afterEach(async () => {
    for (const svc of running.splice(0)) {
        await stopService(svc).catch(() => undefined);
    }
});

interface Harness {
    client: CockpitClient;
    events: CockpitEvent[];
    frames: TelemetryFrame[];
    waitFor<T>(probe: () => T | undefined, ms?: number): Promise<T>;
}

function attach(url: string, opts: Record<string, unknown> = {}): Harness {
    const events: CockpitEvent[] = [];
    const frames: TelemetryFrame[] = [];
    const client = new CockpitClient(
        url,
        (e) => {
            events.push(e);
            if (e.kind === "frame") frames.push(e.frame);
        },
        { wsFactory, reconnectBaseMs: 300, ...opts },
    );
    client.connect();
    const waitFor = async <T>(probe: () => T | undefined, ms = 15000): Promise<T> => {
        const deadline = Date.now() + ms;
        while (Date.now() < deadline) {
            const got = probe();
            if (got !== undefined) return got;
            await new Promise((r) => setTimeout(r, 25));
        }
        throw new Error("waitFor timed out");
    };
    return { client, events, frames, waitFor };
}

describe("cockpit against the live service", () => {
    it("driver token is exclusive across three concurrent clients", async () => {
        const svc = await startService();
        const clients = [attach(svc.url), attach(svc.url), attach(svc.url)];
        const roles: string[] = [];
        for (const h of clients) {
            const ack = await h.waitFor(() =>
                h.events.find((e) => e.kind === "ack") as { kind: "ack"; ack: { role_granted: string } } | undefined,
            );
            roles.push(ack.ack.role_granted);
        }
        expect(roles.filter((r) => r === "driver").length).toBe(1);
        expect(roles.filter((r) => r === "viewer").length).toBe(2);
        // a viewer cannot emit; the client-side gate refuses before the wire
        const viewer = clients[roles.indexOf("viewer")];
        expect(viewer.client.sendCommand((seq) => joystickCommand(seq, { gradX: 1, gradY: 0, rotateRate: 0 }))).toBe(false);
        const driver = clients[roles.indexOf("driver")];
        expect(driver.client.sendCommand((seq) => joystickCommand(seq, { gradX: 0, gradY: 0, rotateRate: 0 }))).toBe(true);
        clients.forEach((h) => h.client.close());
    }, 30000);

    it("schema-version mismatch raises the banner and blocks emission", async () => {
        const svc = await startService();
        const h = attach(svc.url, { schemaVersion: 99 });
        await h.waitFor(() =>
            h.events.find((e) => e.kind === "serverError" && e.frame.code === "VersionMismatch")
                ? true
                : undefined,
        );
        expect(h.client.versionMismatch).toBe(true);
        expect(h.client.sendCommand((seq) => joystickCommand(seq, { gradX: 1, gradY: 0, rotateRate: 0 }))).toBe(false);
        h.client.close();
    }, 30000);

    it("recorded input session replays headlessly to the served trajectory", async () => {
        const dir = mkdtempSync(join(tmpdir(), "cockpit-replay-"));
        const replayPath = join(dir, "session.scn");
        const svc = await startService(["--speed", "40", "--replay-out", replayPath]);
        const h = attach(svc.url);
        await h.waitFor(() => (h.client.driver ? true : undefined));

        h.client.sendCommand((seq) => joystickCommand(seq, { gradX: -1.5, gradY: 0.5, rotateRate: 0.2 }));
        await h.waitFor(() => (h.frames.at(-1)?.time_s ?? 0) >= 2.0 ? true : undefined);
        h.client.sendCommand((seq) => joystickCommand(seq, { gradX: 0.4, gradY: -1.0, rotateRate: 0 }));
        await h.waitFor(() => (h.frames.at(-1)?.time_s ?? 0) >= 4.0 ? true : undefined);
        h.client.sendCommand((seq) => joystickCommand(seq, { gradX: 0, gradY: 0, rotateRate: 0 }));
        // the zero command lands at the next tick boundary; wait until the
        // replay horizon (== its application time) is visible in telemetry
        const replayDoc = await h.waitFor(() => {
            try {
                const doc = JSON.parse(readFileSync(replayPath, "utf-8"));
                const seen = h.frames.some((f) => f.time_s === doc.duration_s);
                return doc.script.length >= 3 && seen ? doc : undefined;
            } catch {
                return undefined;
            }
        });
        const reference = h.frames.find((f) => f.time_s === replayDoc.duration_s)!;
        h.client.close();
        const svcRef = running.splice(running.indexOf(svc), 1)[0];
        await stopService(svcRef);

        // headless re-execution through the CLI
        await new Promise<void>((resolvePromise, reject) => {
            execFile(
                PYTHON,
                ["-m", "microforge.cli", "run", replayPath, "--out", dir],
                { cwd: REPO_ROOT },
                (err, stdout) => (err ? reject(new Error(`${err}: ${stdout}`)) : resolvePromise()),
            );
        });
        const trace = readFileSync(join(dir, "teleop_default_trace.csv"), "utf-8").trim().split("\n");
        const final = new Map<string, number[]>();
        for (const line of trace.slice(1)) {
            const [t, id, x, y, theta, lam] = line.split(",");
            if (Number(t) === replayDoc.duration_s) {
                final.set(id, [Number(x), Number(y), Number(theta), Number(lam)]);
            }
        }
        expect(final.size).toBeGreaterThan(0);
        for (const body of reference.bodies) {
            const replayed = final.get(body.id)!;
            expect(replayed, `body ${body.id}`).toBeDefined();
            // bit-identical doubles: JSON and CSV both round-trip exactly
            expect(replayed[0]).toBe(body.x);
            expect(replayed[1]).toBe(body.y);
            expect(replayed[2]).toBe(body.theta);
            expect(replayed[3]).toBe(body.lam);
        }
    }, 60000);

    it("reconnects automatically within 5 s of a service restart", async () => {
        const first = await startService();
        const port = first.port;
        const h = attach(first.url);
        await h.waitFor(() => (h.client.acked ? true : undefined));
        const ref = running.splice(running.indexOf(first), 1)[0];
        await stopService(ref);
        await h.waitFor(() => (h.events.some((e) => e.kind === "closed") ? true : undefined));
        await startService([], port);
        const t0 = Date.now();
        await h.waitFor(() => (h.client.acked ? true : undefined), 10000);
        expect(Date.now() - t0).toBeLessThan(5000);
        h.client.close();
    }, 45000);
});
