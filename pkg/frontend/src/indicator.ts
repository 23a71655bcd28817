// The inline spinner lifecycle: visible exactly between a paired
// started/finished pair of fetchingMultiline notifications.

export type IndicatorState =
  | { kind: "hidden" }
  | { kind: "spinner"; requestId: number | string };

export class IndicatorStateMachine {
  state: IndicatorState = { kind: "hidden" };
  readonly timeline: IndicatorState[] = [];

  constructor(private onChange?: (state: IndicatorState) => void) {}

  handle(params: { requestId: number | string; state: "started" | "finished" }): void {
    if (params.state === "started") {
      this.set({ kind: "spinner", requestId: params.requestId });
      return;
    }
    if (this.state.kind === "spinner" && this.state.requestId === params.requestId) {
      this.set({ kind: "hidden" });
    } else {
      console.warn(`unpaired fetchingMultiline finish for ${params.requestId}`);
    }
  }

  private set(state: IndicatorState): void {
    this.state = state;
    this.timeline.push(state);
    this.onChange?.(state);
  }
}
