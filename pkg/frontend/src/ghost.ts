// Ghost text is virtual: it describes what to paint, never what the
// document contains.  A single-line suggestion renders inline after the
// cursor; a multi-line one renders its first segment inline and the
// rest as a dimmed block that only pushes *later* lines down visually.

import type { Position, Suggestion } from "./protocol.js";
import type { EditorModel } from "./editorModel.js";

const CLOSERS = new Set(["}", ")", "]"]);

export interface GhostRendering {
  requestId: number | string;
  anchor: Position;
  kind: "single_line" | "multi_line";
  inlineText: string;
  blockLines: string[];
  dim: true;
  /** the full suggestion text, applied on acceptance */
  text: string;
}

export function renderSuggestion(
  requestId: number | string,
  suggestion: Suggestion,
  model: EditorModel,
): GhostRendering {
  const anchor = suggestion.insertAt;
  const lineText = model.lines()[anchor.line] ?? "";
  const rightOfCursor = lineText.slice(anchor.character);
  // the trigger policy guarantees nothing but closers/whitespace right of
  // the cursor; a multi-line block would displace anything else
  for (const ch of rightOfCursor) {
    if (!CLOSERS.has(ch) && ch.trim() !== "") {
      throw new Error(`ghost anchor has code to its right: ${JSON.stringify(rightOfCursor)}`);
    }
  }
  const segments = suggestion.text.split("\n");
  return {
    requestId,
    anchor,
    kind: suggestion.kind,
    inlineText: segments[0],
    blockLines: segments.slice(1),
    dim: true,
    text: suggestion.text,
  };
}
