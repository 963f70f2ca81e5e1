/**
 * Session client: transport, bounded frame queue, input buffering.
 *
 * Frames are decoupled from rendering by a latest-wins bounded queue
 * (render drops frames under load; the ribbon and trace still see every
 * frame through subscribers).  Input samples are never dropped while
 * connected; on disconnect they buffer for up to one second and are
 * then discarded, which the UI surfaces as a banner.
 */

import { encodeMessage, inputMessage, parseMessage } from "./protocol.js";
import type { MetricReport, ServerMessage, SessionFrame } from "./protocol.js";

export interface Transport {
  send(line: string): void;
  close(): void;
}

export interface ClientEvents {
  onFrame?: (frame: SessionFrame) => void;
  onMessage?: (msg: ServerMessage) => void;
  onDropError?: (count: number) => void;
}

export const INPUT_BUFFER_MS = 1000;

export class SessionClient {
  private transport: Transport | null = null;
  private pendingInputs: { line: string; queuedAt: number }[] = [];
  readonly frameQueue: SessionFrame[] = [];
  errorCount = 0;
  lastMetrics: MetricReport | null = null;
  paused = false;

  constructor(
    readonly events: ClientEvents = {},
    readonly frameQueueCapacity = 120,
  ) {}

  attach(transport: Transport): void {
    this.transport = transport;
    const now = typeof performance !== "undefined" ? performance.now() : Date.now();
    for (const pending of this.pendingInputs) {
      if (now - pending.queuedAt <= INPUT_BUFFER_MS) {
        transport.send(pending.line);
      }
    }
    this.pendingInputs = [];
  }

  detach(): void {
    this.transport = null;
  }

  get connected(): boolean {
    return this.transport !== null;
  }

  hello(mode: "ceac" | "ccc", controller?: Record<string, number>): void {
    const payload: Record<string, unknown> = { type: "hello", mode };
    if (controller) payload.controller = controller;
    this.transport?.send(encodeMessage(payload));
  }

  sendInput(t: number, phi: number, nowMs?: number): void {
    const line = inputMessage(t, phi);
    if (this.transport) {
      this.transport.send(line);
    } else {
      const queuedAt = nowMs ?? (typeof performance !== "undefined" ? performance.now() : Date.now());
      this.pendingInputs.push({ line, queuedAt });
      this.pendingInputs = this.pendingInputs.filter((p) => queuedAt - p.queuedAt <= INPUT_BUFFER_MS);
    }
  }

  end(): void {
    this.transport?.send(encodeMessage({ type: "end" }));
  }

  /** Feed one raw protocol line from the transport. */
  receive(line: string): void {
    let msg: ServerMessage;
    try {
      msg = parseMessage(line);
    } catch {
      this.errorCount += 1;
      this.events.onDropError?.(this.errorCount);
      return;
    }
    if (msg.type === "frame") {
      const frame = msg as SessionFrame & { type: "frame" };
      this.frameQueue.push(frame);
      if (this.frameQueue.length > this.frameQueueCapacity) {
        // latest-wins on overflow
        this.frameQueue.splice(0, this.frameQueue.length - this.frameQueueCapacity);
      }
      this.events.onFrame?.(frame);
    } else if (msg.type === "metrics") {
      this.lastMetrics = msg.report;
    } else if (msg.type === "paused") {
      this.paused = true;
    } else if (msg.type === "resumed") {
      this.paused = false;
    }
    this.events.onMessage?.(msg);
  }

  /** The newest queued frame, discarding older ones (frame dropping). */
  latestFrame(): SessionFrame | null {
    if (this.frameQueue.length === 0) return null;
    const frame = this.frameQueue[this.frameQueue.length - 1]!;
    this.frameQueue.length = 0;
    return frame;
  }
}

/** Browser WebSocket transport speaking one protocol line per message. */
export function connectWebSocket(url: string, client: SessionClient, onClose?: () => void): WebSocket {
  const socket = new WebSocket(url);
  socket.addEventListener("open", () => {
    client.attach({
      send: (line) => socket.send(line),
      close: () => socket.close(),
    });
  });
  socket.addEventListener("message", (event) => {
    for (const line of String(event.data).split("\n")) {
      if (line.trim().length > 0) client.receive(line);
    }
  });
  socket.addEventListener("close", () => {
    client.detach();
    onClose?.();
  });
  return socket;
}
