// Wires the document model, the RPC client, ghost rendering, and the
// spinner indicator into the editing loop: every keystroke syncs the
// document, dismisses any ghost, and asks for a fresh completion; Tab
// accepts, Escape rejects.  The document text changes only in
// EditorModel.typeChar and EditorModel.acceptText.

import { RpcClient } from "./client.js";
import { EditorModel } from "./editorModel.js";
import { renderSuggestion, type GhostRendering } from "./ghost.js";
import { IndicatorStateMachine } from "./indicator.js";
import type { CompletionResult, Position } from "./protocol.js";

export interface ControllerOptions {
  uri: string;
  languageId: "indent" | "brace";
  onRender?: () => void;
}

export class EditorController {
  readonly model = new EditorModel();
  readonly indicator: IndicatorStateMachine;
  ghost: GhostRendering | null = null;

  constructor(private client: RpcClient, private options: ControllerOptions) {
    this.indicator = new IndicatorStateMachine(() => options.onRender?.());
    client.onNotification("completion/fetchingMultiline", (params) =>
      this.indicator.handle(params));
  }

  async open(initialText = ""): Promise<void> {
    await this.client.request("initialize", {});
    this.model.text = initialText;
    this.client.notify("textDocument/didOpen", {
      textDocument: {
        uri: this.options.uri,
        version: this.model.version,
        text: initialText,
        languageId: this.options.languageId,
      },
    });
  }

  /** One keystroke: dismiss the ghost, edit, sync, request a completion. */
  async typeChar(ch: string): Promise<void> {
    this.ghost = null;
    const version = this.model.typeChar(ch);
    this.syncDocument(version);
    await this.requestCompletion();
  }

  async typeText(text: string): Promise<void> {
    for (const ch of text) await this.typeChar(ch);
  }

  async requestCompletion(explicit = false): Promise<void> {
    const requestedVersion = this.model.version;
    const { id, result } = this.client.requestWithId<CompletionResult>(
      "textDocument/inlineCompletions",
      {
        textDocument: { uri: this.options.uri, version: requestedVersion },
        position: this.model.cursor,
        origin: { explicitShortcut: explicit },
      },
    );
    const response = await result;
    if (this.model.version !== requestedVersion) return; // stale, drop silently
    if (!response.suggestion) return;
    this.ghost = renderSuggestion(id, response.suggestion, this.model);
    this.options.onRender?.();
    this.client.notify("completion/displayed", { requestId: id });
  }

  /** Tab: commit the ghost; the server returns the post-insertion cursor. */
  async acceptGhost(): Promise<Position | null> {
    if (!this.ghost) return null;
    const ghost = this.ghost;
    const result = await this.client.request<{ position: Position }>(
      "completion/accepted", { requestId: ghost.requestId });
    const version = this.model.acceptText(ghost.anchor, ghost.text, result.position);
    this.ghost = null;
    this.syncDocument(version);
    this.options.onRender?.();
    return result.position;
  }

  /** Escape: drop the ghost and tell the server. */
  rejectGhost(): void {
    if (!this.ghost) return;
    this.client.notify("completion/rejected", { requestId: this.ghost.requestId });
    this.ghost = null;
    this.options.onRender?.();
  }

  private syncDocument(version: number): void {
    this.client.notify("textDocument/didChange", {
      textDocument: { uri: this.options.uri, version },
      contentChanges: [{ text: this.model.text }],
    });
  }
}
