// The DOM layer: a textarea-grade editor with an overlay for ghost text
// and a spinner span.  Deliberately minimal; the overlay paints virtual
// content and never writes into the textarea.

import { EditorController } from "./controller.js";

export class EditorWidget {
  readonly textarea: HTMLTextAreaElement;
  readonly ghostInline: HTMLSpanElement;
  readonly ghostBlock: HTMLDivElement;
  readonly spinner: HTMLSpanElement;

  constructor(container: HTMLElement, private controller: EditorController) {
    container.classList.add("scopeline-editor");
    this.textarea = document.createElement("textarea");
    this.textarea.spellcheck = false;
    this.ghostInline = document.createElement("span");
    this.ghostInline.className = "ghost ghost-inline";
    this.ghostBlock = document.createElement("div");
    this.ghostBlock.className = "ghost ghost-block";
    this.spinner = document.createElement("span");
    this.spinner.className = "spinner";
    this.spinner.textContent = "◌ fetching";
    container.append(this.textarea, this.ghostInline, this.ghostBlock, this.spinner);
    this.textarea.addEventListener("keydown", (event) => this.onKeyDown(event));
    this.render();
  }

  onKeyDown(event: KeyboardEvent): void {
    if (event.key === "Tab" && this.controller.ghost) {
      event.preventDefault();
      void this.controller.acceptGhost().then(() => this.render());
      return;
    }
    if (event.key === "Escape") {
      event.preventDefault();
      this.controller.rejectGhost();
      this.render();
      return;
    }
    const ch = event.key === "Enter" ? "\n" : event.key;
    if (ch.length === 1) {
      event.preventDefault();
      void this.controller.typeChar(ch).then(() => this.render());
    }
  }

  render(): void {
    const { model, ghost, indicator } = this.controller;
    // the document lives in the textarea; ghost content never does
    if (this.textarea.value !== model.text) this.textarea.value = model.text;
    this.ghostInline.textContent = ghost ? ghost.inlineText : "";
    this.ghostBlock.textContent = ghost ? ghost.blockLines.join("\n") : "";
    this.ghostBlock.style.display = ghost && ghost.blockLines.length ? "block" : "none";
    this.spinner.style.display = indicator.state.kind === "spinner" ? "inline" : "none";
  }
}
