/**
 * WebSocket session with auto-reconnect. The schema in the hello frame is
 * checked before anything renders; a mismatch blocks the UI instead of
 * guessing. Reconnects rebuild the whole world from the server's replayed
 * history, so a dropped connection costs nothing but the gap itself.
 */

import { parseFrame, PROTOCOL_SCHEMA, ServerFrame } from "./protocol.js";

const RETRY_MIN_MS = 500;
const RETRY_MAX_MS = 5000;

export interface ClientHandlers {
  onFrame: (frame: ServerFrame) => void;
  onStatus: (status: "connecting" | "open" | "retrying" | "schema-mismatch") => void;
}

export class LiveClient {
  private url: string;
  private handlers: ClientHandlers;
  private ws: WebSocket | null = null;
  private retryMs = RETRY_MIN_MS;
  private closed = false;
  private blocked = false; // schema mismatch: stop retrying

  constructor(url: string, handlers: ClientHandlers) {
    this.url = url;
    this.handlers = handlers;
  }

  connect(): void {
    if (this.closed || this.blocked) return;
    this.handlers.onStatus("connecting");
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.retryMs = RETRY_MIN_MS;
      this.handlers.onStatus("open");
    };
    ws.onmessage = (ev: MessageEvent) => {
      if (typeof ev.data !== "string") return;
      const frame = parseFrame(ev.data);
      if (frame === null) return; // malformed or unknown: skip, never crash
      if (frame.t === "hello" && frame.schema !== PROTOCOL_SCHEMA) {
        this.blocked = true;
        this.handlers.onStatus("schema-mismatch");
        ws.close();
        return;
      }
      this.handlers.onFrame(frame);
    };
    ws.onclose = () => {
      this.ws = null;
      if (this.closed || this.blocked) return;
      this.handlers.onStatus("retrying");
      const delay = this.retryMs;
      this.retryMs = Math.min(this.retryMs * 2, RETRY_MAX_MS);
      setTimeout(() => this.connect(), delay);
    };
    ws.onerror = () => {
      // onclose follows and handles the retry
    };
  }

  send(message: string): void {
    if (this.ws !== null && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(message);
    }
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
