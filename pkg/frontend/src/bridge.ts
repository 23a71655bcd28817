// Websocket-to-stdio bridge: each connection gets its own completion
// server child process; JSON-RPC payloads pass through unchanged, only
// the framing differs (ws frames outside, Content-Length inside).

import { createServer } from "http";
import { spawn } from "child_process";
import { WebSocketServer, WebSocket } from "ws";
import { FrameDecoder, encodeFrame, type JsonRpcMessage } from "./protocol.js";

const PORT = Number(process.env.BRIDGE_PORT ?? 8713);
const SERVER_CMD = process.env.SCOPELINE_CMD ?? "python3";
const SERVER_ARGS = (process.env.SCOPELINE_ARGS ?? "-m scopeline.cli serve").split(" ");

const httpServer = createServer();
const wss = new WebSocketServer({ server: httpServer });

wss.on("connection", (ws: WebSocket) => {
  const child = spawn(SERVER_CMD, SERVER_ARGS, { stdio: ["pipe", "pipe", "inherit"] });
  const decoder = new FrameDecoder();

  child.stdout.on("data", (chunk: Buffer) => {
    for (const message of decoder.push(new Uint8Array(chunk))) {
      ws.send(JSON.stringify(message));
    }
  });
  child.on("exit", () => ws.close());

  ws.on("message", (data) => {
    const message = JSON.parse(data.toString()) as JsonRpcMessage;
    child.stdin.write(encodeFrame(message));
  });
  ws.on("close", () => child.kill());
});

httpServer.listen(PORT, () => {
  console.log(`scopeline bridge on ws://localhost:${PORT}`);
});
