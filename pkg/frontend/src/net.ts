// WebSocket session management: handshake, reconnect with backoff, and the
// command gate (nothing is sent without a live handshake and the driver
// token; a schema-version mismatch blocks permanently until re-created).

import { CockpitEvent } from "./state.js";
import { helloMessage, parseServerMessage, SCHEMA_VERSION } from "./protocol.js";

export interface WebSocketLike {
    send(data: string): void;
    close(): void;
    onopen: ((ev?: unknown) => void) | null;
    onmessage: ((ev: { data: unknown }) => void) | null;
    onclose: ((ev?: unknown) => void) | null;
    onerror: ((ev?: unknown) => void) | null;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

export interface ClientOptions {
    role?: "driver" | "viewer";
    schemaVersion?: number;
    wsFactory?: WebSocketFactory;
    reconnectBaseMs?: number;
    reconnectMaxMs?: number;
    setTimeoutFn?: (fn: () => void, ms: number) => unknown;
}

const defaultFactory: WebSocketFactory = (url) =>
    new (globalThis as { WebSocket: new (u: string) => WebSocketLike }).WebSocket(url);

export class CockpitClient {
    readonly url: string;
    private dispatch: (e: CockpitEvent) => void;
    private role: "driver" | "viewer";
    private schemaVersion: number;
    private wsFactory: WebSocketFactory;
    private reconnectBaseMs: number;
    private reconnectMaxMs: number;
    private setTimeoutFn: (fn: () => void, ms: number) => unknown;

    private ws: WebSocketLike | null = null;
    private seq = 0;
    private attempts = 0;
    private closedByUser = false;
    acked = false;
    driver = false;
    versionMismatch = false;

    constructor(url: string, dispatch: (e: CockpitEvent) => void, opts: ClientOptions = {}) {
        this.url = url;
        this.dispatch = dispatch;
        this.role = opts.role ?? "driver";
        this.schemaVersion = opts.schemaVersion ?? SCHEMA_VERSION;
        this.wsFactory = opts.wsFactory ?? defaultFactory;
        this.reconnectBaseMs = opts.reconnectBaseMs ?? 500;
        this.reconnectMaxMs = opts.reconnectMaxMs ?? 5000;
        this.setTimeoutFn = opts.setTimeoutFn ?? ((fn, ms) => setTimeout(fn, ms));
    }

    connect(): void {
        this.closedByUser = false;
        this.acked = false;
        this.driver = false;
        this.dispatch({ kind: "connecting" });
        const ws = this.wsFactory(this.url);
        this.ws = ws;
        ws.onopen = () => {
            ws.send(helloMessage(this.role, this.schemaVersion));
        };
        ws.onmessage = (ev) => this.handleMessage(String(ev.data));
        ws.onerror = () => {
            /* onclose follows */
        };
        ws.onclose = () => {
            this.acked = false;
            this.driver = false;
            this.dispatch({ kind: "closed" });
            if (!this.closedByUser && !this.versionMismatch) {
                this.scheduleReconnect();
            }
        };
    }

    private handleMessage(raw: string): void {
        const msg = parseServerMessage(raw);
        if (msg === null) return;
        if (msg.type === "hello_ack") {
            this.acked = true;
            this.attempts = 0;
            this.driver = msg.role_granted === "driver";
            this.dispatch({ kind: "ack", ack: msg });
        } else if (msg.type === "telemetry") {
            this.dispatch({ kind: "frame", frame: msg });
        } else {
            if (msg.code === "VersionMismatch") {
                this.versionMismatch = true;
            }
            this.dispatch({ kind: "serverError", frame: msg });
        }
    }

    private scheduleReconnect(): void {
        const delay = Math.min(
            this.reconnectBaseMs * 2 ** this.attempts,
            this.reconnectMaxMs,
        );
        this.attempts += 1;
        this.setTimeoutFn(() => {
            if (!this.closedByUser && !this.versionMismatch) this.connect();
        }, delay);
    }

    // Returns false when the command was suppressed (no token / mismatch / down).
    sendCommand(build: (seq: number) => string): boolean {
        if (!this.ws || !this.acked || this.versionMismatch || !this.driver) return false;
        this.seq += 1;
        this.ws.send(build(this.seq));
        return true;
    }

    // request_driver is the one command a viewer may send.
    requestDriver(): boolean {
        if (!this.ws || !this.acked || this.versionMismatch) return false;
        this.seq += 1;
        this.ws.send(
            JSON.stringify({ type: "command", client_seq: this.seq, kind: "request_driver" }),
        );
        return true;
    }

    close(): void {
        this.closedByUser = true;
        this.ws?.close();
    }
}
