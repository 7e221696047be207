import { describe, expect, it } from "vitest";

import { CockpitClient, WebSocketLike } from "../src/net.js";
import { CockpitEvent } from "../src/state.js";

class FakeSocket implements WebSocketLike {
    sent: string[] = [];
    onopen: ((ev?: unknown) => void) | null = null;
    onmessage: ((ev: { data: unknown }) => void) | null = null;
    onclose: ((ev?: unknown) => void) | null = null;
    onerror: ((ev?: unknown) => void) | null = null;
    send(data: string): void {
        this.sent.push(data);
    }
    close(): void {
        this.onclose?.();
    }
    // test helpers
    open(): void {
        this.onopen?.();
    }
    receive(obj: unknown): void {
        this.onmessage?.({ data: JSON.stringify(obj) });
    }
}

function harness(role: "driver" | "viewer" = "driver") {
    const sockets: FakeSocket[] = [];
    const events: CockpitEvent[] = [];
    const timers: Array<{ fn: () => void; ms: number }> = [];
    const client = new CockpitClient("ws://test", (e) => events.push(e), {
        role,
        wsFactory: () => {
            const s = new FakeSocket();
            sockets.push(s);
            return s;
        },
        setTimeoutFn: (fn, ms) => timers.push({ fn, ms }),
    });
    return { client, sockets, events, timers };
}

const ACK = {
    type: "hello_ack",
    schema_version: 1,
    role_granted: "driver",
    seed: 1,
    scenario: "x",
};

describe("cockpit client", () => {
    it("sends hello on open and unlocks commands after a driver ack", () => {
        const { client, sockets } = harness();
        client.connect();
        const ws = sockets[0];
        expect(client.sendCommand(() => "nope")).toBe(false); // not open yet
        ws.open();
        expect(JSON.parse(ws.sent[0]).type).toBe("hello");
        ws.receive(ACK);
        expect(client.sendCommand((seq) => JSON.stringify({ seq }))).toBe(true);
        expect(ws.sent.length).toBe(2);
    });

    it("viewer ack keeps commands suppressed", () => {
        const { client, sockets } = harness();
        client.connect();
        sockets[0].open();
        sockets[0].receive({ ...ACK, role_granted: "viewer" });
        expect(client.sendCommand(() => "x")).toBe(false);
        expect(client.requestDriver()).toBe(true); // the one allowed escape hatch
    });

    it("version mismatch blocks sends and reconnects", () => {
        const { client, sockets, timers } = harness();
        client.connect();
        sockets[0].open();
        sockets[0].receive({ type: "error", schema_version: 1, code: "VersionMismatch", detail: "" });
        sockets[0].close();
        expect(client.versionMismatch).toBe(true);
        expect(client.sendCommand(() => "x")).toBe(false);
        expect(timers.length).toBe(0); // no reconnect attempts
    });

    it("reconnects with bounded backoff after a drop", () => {
        const { client, sockets, timers } = harness();
        client.connect();
        sockets[0].open();
        sockets[0].receive(ACK);
        sockets[0].close(); // dropped
        expect(timers.length).toBe(1);
        expect(timers[0].ms).toBe(500);
        timers[0].fn(); // fire the reconnect
        expect(sockets.length).toBe(2);
        sockets[1].close(); // fails again: backoff doubles, capped at 5 s
        expect(timers[1].ms).toBe(1000);
        for (let i = 2; i < 8; i++) {
            timers[i - 1].fn();
            sockets[i].close();
        }
        expect(timers.at(-1)!.ms).toBe(5000);
    });

    it("client_seq increases across commands", () => {
        const { client, sockets } = harness();
        client.connect();
        sockets[0].open();
        sockets[0].receive(ACK);
        client.sendCommand((seq) => JSON.stringify({ client_seq: seq }));
        client.sendCommand((seq) => JSON.stringify({ client_seq: seq }));
        const seqs = sockets[0].sent.slice(1).map((s) => JSON.parse(s).client_seq);
        expect(seqs).toEqual([1, 2]);
    });

    it("user close stops reconnecting", () => {
        const { client, sockets, timers } = harness();
        client.connect();
        sockets[0].open();
        client.close();
        expect(timers.length).toBe(0);
    });
});
