// Browser-side transport: one JSON-RPC message per websocket frame.
// The bridge process unwraps these into the server's framed stdio.

import type { JsonRpcMessage, Transport } from "./protocol.js";

export class WebSocketTransport implements Transport {
  private handlers: ((message: JsonRpcMessage) => void)[] = [];
  private queue: JsonRpcMessage[] = [];
  private open = false;

  constructor(private socket: WebSocket) {
    socket.addEventListener("open", () => {
      this.open = true;
      for (const message of this.queue.splice(0)) this.send(message);
    });
    socket.addEventListener("message", (event) => {
      const message = JSON.parse(String(event.data)) as JsonRpcMessage;
      for (const handler of this.handlers) handler(message);
    });
  }

  send(message: JsonRpcMessage): void {
    if (!this.open) {
      this.queue.push(message);
      return;
    }
    this.socket.send(JSON.stringify(message));
  }

  onMessage(handler: (message: JsonRpcMessage) => void): void {
    this.handlers.push(handler);
  }

  close(): void {
    this.socket.close();
  }
}
