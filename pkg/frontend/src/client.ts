// Thin JSON-RPC client over any Transport: promise-based requests,
// fire-and-forget notifications, and a notification handler registry.

import type { JsonRpcId, JsonRpcMessage, Transport } from "./protocol.js";

type Pending = {
  resolve: (value: any) => void;
  reject: (error: Error) => void;
};

export class RpcClient {
  private nextId = 1;
  private pending = new Map<JsonRpcId, Pending>();
  private handlers = new Map<string, (params: any) => void>();

  constructor(private transport: Transport) {
    transport.onMessage((message) => this.dispatch(message));
  }

  request<T = any>(method: string, params: any): Promise<T> {
    return this.requestWithId<T>(method, params).result;
  }

  /** Like request(), but exposes the JSON-RPC id so follow-up
   * notifications (displayed/accepted/rejected) can reference it. */
  requestWithId<T = any>(method: string, params: any): { id: JsonRpcId; result: Promise<T> } {
    const id = this.nextId++;
    const result = new Promise<T>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
    });
    this.transport.send({ jsonrpc: "2.0", id, method, params });
    return { id, result };
  }

  notify(method: string, params: any): void {
    this.transport.send({ jsonrpc: "2.0", method, params });
  }

  onNotification(method: string, handler: (params: any) => void): void {
    this.handlers.set(method, handler);
  }

  close(): void {
    this.transport.close();
    for (const { reject } of this.pending.values()) {
      reject(new Error("client closed"));
    }
    this.pending.clear();
  }

  private dispatch(message: JsonRpcMessage): void {
    if (message.method !== undefined) {
      const handler = this.handlers.get(message.method);
      if (handler) handler(message.params);
      return;
    }
    if (message.id === undefined) return;
    const pending = this.pending.get(message.id);
    if (!pending) return;
    this.pending.delete(message.id);
    if (message.error) {
      pending.reject(new Error(message.error.message));
    } else {
      pending.resolve(message.result);
    }
  }
}
