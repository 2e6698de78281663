// Steering panel: variant picker at manual-selection pauses, ad-hoc upload,
// resume/abort. Controls only act while the server reports the run paused;
// the server stays authoritative and its rejections are shown verbatim.

import { ApiClient, ApiError } from "./api.js";
import type { RunView, VariantPause } from "./state.js";
import { steeringEnabled, variantPause } from "./state.js";

export interface SteeringCallbacks {
  onCommandDone: () => void;
  onError: (message: string) => void;
}

export class SteeringPanel {
  readonly root: HTMLElement;
  private readonly api: ApiClient;
  private readonly callbacks: SteeringCallbacks;
  private runId: string | null = null;
  private pause: VariantPause | null = null;

  readonly picker: HTMLSelectElement;
  readonly selectButton: HTMLButtonElement;
  readonly editButton: HTMLButtonElement;
  readonly resumeButton: HTMLButtonElement;
  readonly abortButton: HTMLButtonElement;
  readonly statusLine: HTMLElement;

  constructor(root: HTMLElement, api: ApiClient, callbacks: SteeringCallbacks) {
    this.root = root;
    this.api = api;
    this.callbacks = callbacks;
    root.classList.add("steering-panel");
    this.statusLine = el("div", "steering-status");
    this.picker = el("select", "variant-picker") as HTMLSelectElement;
    this.selectButton = button("Select variant", () => this.submitVariant("select-variant"));
    this.editButton = button("Apply as ad-hoc edit", () => this.submitVariant("apply-edit"));
    this.resumeButton = button("Resume", () => this.submit({ kind: "resume" }));
    this.abortButton = button("Abort", () => this.submit({ kind: "abort" }));
    root.replaceChildren(
      this.statusLine,
      this.picker,
      this.selectButton,
      this.editButton,
      this.resumeButton,
      this.abortButton,
    );
    this.setEnabled(false, false);
  }

  /** Refresh controls from the latest view; fetches variants on a new pause. */
  async update(runId: string, view: RunView): Promise<void> {
    this.runId = runId;
    const paused = steeringEnabled(view);
    const pause = variantPause(view);
    this.statusLine.textContent = paused
      ? `paused: ${view.reason}`
      : `run is ${view.status}`;
    if (pause && (!this.pause || this.pause.var !== pause.var)) {
      const variants = await this.api.listGraphs(pause.interfaceId, runId);
      this.picker.replaceChildren(
        ...variants.map((v) => {
          const option = document.createElement("option");
          option.value = v.id;
          option.textContent = v.id;
          return option;
        }),
      );
    }
    this.pause = pause;
    this.setEnabled(paused, paused && pause !== null);
  }

  variantIds(): string[] {
    return Array.from(this.picker.options).map((o) => o.value);
  }

  private setEnabled(paused: boolean, variant: boolean): void {
    this.resumeButton.disabled = !paused;
    this.abortButton.disabled = !paused;
    this.picker.disabled = !variant;
    this.selectButton.disabled = !variant;
    this.editButton.disabled = !variant;
  }

  private async submitVariant(kind: "select-variant" | "apply-edit"): Promise<void> {
    if (!this.pause || !this.picker.value) return;
    const command =
      kind === "select-variant"
        ? { kind, var: this.pause.var, graphId: this.picker.value }
        : { kind, var: this.pause.var, replacementGraphId: this.picker.value };
    await this.submit(command as never);
  }

  private async submit(command: { kind: "resume" | "abort" } | never): Promise<void> {
    if (!this.runId) return;
    try {
      await this.api.command(this.runId, command);
      this.callbacks.onCommandDone();
    } catch (error) {
      if (error instanceof ApiError) {
        this.callbacks.onError(String(error.message));
      } else {
        throw error;
      }
    }
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

function button(label: string, onClick: () => void): HTMLButtonElement {
  const node = document.createElement("button");
  node.textContent = label;
  node.addEventListener("click", onClick);
  return node;
}
