// The document the user owns.  Its text changes only through keystrokes
// or an explicit acceptance; rendering never writes here.

import type { Position } from "./protocol.js";

export class EditorModel {
  text = "";
  version = 0;
  cursor: Position = { line: 0, character: 0 };

  lines(): string[] {
    return this.text.split("\n");
  }

  offsetOf(position: Position): number {
    const lines = this.lines();
    let offset = 0;
    for (let i = 0; i < position.line; i++) offset += lines[i].length + 1;
    return offset + position.character;
  }

  /** One keystroke at the cursor; returns the new version. */
  typeChar(ch: string): number {
    const offset = this.offsetOf(this.cursor);
    this.text = this.text.slice(0, offset) + ch + this.text.slice(offset);
    if (ch === "\n") {
      this.cursor = { line: this.cursor.line + 1, character: 0 };
    } else {
      this.cursor = { line: this.cursor.line, character: this.cursor.character + ch.length };
    }
    return ++this.version;
  }

  /** Commit an accepted suggestion; the only other path that edits text. */
  acceptText(anchor: Position, text: string, endCursor: Position): number {
    const offset = this.offsetOf(anchor);
    this.text = this.text.slice(0, offset) + text + this.text.slice(offset);
    this.cursor = endCursor;
    return ++this.version;
  }

  setCursor(position: Position): void {
    this.cursor = position;
  }
}
