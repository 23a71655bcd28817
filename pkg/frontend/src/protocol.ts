// JSON-RPC 2.0 message shapes and the LSP-style Content-Length framing
// used by the completion server's stdio transport.  The websocket bridge
// carries the same JSON payloads unframed, one message per ws frame.

export interface Position {
  line: number;
  character: number;
}

export interface Suggestion {
  text: string;
  kind: "single_line" | "multi_line";
  insertAt: Position;
}

export interface CompletionResult {
  suggestion: Suggestion | null;
  servedFromCache: boolean;
  generationLatencyMs: number;
  invalidated: boolean;
  timedOut: boolean;
  decision: { kind: string | null; reason: string | null };
  diagnostic: string | null;
}

export type JsonRpcId = number | string;

export interface JsonRpcMessage {
  jsonrpc: "2.0";
  id?: JsonRpcId;
  method?: string;
  params?: any;
  result?: any;
  error?: { code: number; message: string };
}

export interface Transport {
  send(message: JsonRpcMessage): void;
  onMessage(handler: (message: JsonRpcMessage) => void): void;
  close(): void;
}

export function encodeFrame(message: JsonRpcMessage): Uint8Array {
  const body = new TextEncoder().encode(JSON.stringify(message));
  const header = new TextEncoder().encode(`Content-Length: ${body.length}\r\n\r\n`);
  const frame = new Uint8Array(header.length + body.length);
  frame.set(header, 0);
  frame.set(body, header.length);
  return frame;
}

/** Incremental decoder for a Content-Length framed byte stream. */
export class FrameDecoder {
  private buffer = new Uint8Array(0);

  push(chunk: Uint8Array): JsonRpcMessage[] {
    const merged = new Uint8Array(this.buffer.length + chunk.length);
    merged.set(this.buffer, 0);
    merged.set(chunk, this.buffer.length);
    this.buffer = merged;

    const messages: JsonRpcMessage[] = [];
    for (;;) {
      const text = new TextDecoder().decode(this.buffer);
      const headerEnd = text.indexOf("\r\n\r\n");
      if (headerEnd < 0) break;
      const match = /content-length:\s*(\d+)/i.exec(text.slice(0, headerEnd));
      if (!match) throw new Error("missing Content-Length header");
      const length = parseInt(match[1], 10);
      const bodyStart = new TextEncoder().encode(text.slice(0, headerEnd + 4)).length;
      if (this.buffer.length < bodyStart + length) break;
      const body = this.buffer.slice(bodyStart, bodyStart + length);
      messages.push(JSON.parse(new TextDecoder().decode(body)));
      this.buffer = this.buffer.slice(bodyStart + length);
    }
    return messages;
  }
}
