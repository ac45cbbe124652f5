// One live teaching session: wires drawn demonstrations to the service and
// routes responses to the feedback and metrics panels. UI state derives from
// service responses plus the in-progress drawing, nothing else.

import { Client } from './api';
import { DrawnDemo, TooShortError, pointerToDemo } from './drawing';
import { CanvasMapping } from './geometry';
import { showFeedback } from './feedback';
import { renderMetricsPanel } from './metrics';
import { ConditionKind, SessionHandle, StepMetrics, StepResponse } from './types';

const METRIC_CONDITIONS: ConditionKind[] = ['VF', 'VR'];

export interface Panels {
  feedback: HTMLElement;
  metrics: HTMLElement;
  status: HTMLElement;
}

export class UiSession {
  history: StepMetrics[] = [];
  stopped = false;
  busy = false;

  constructor(
    readonly client: Client,
    readonly handle: SessionHandle,
    readonly mapping: CanvasMapping,
    readonly panels: Panels,
  ) {}

  private metricsRevealed(): boolean {
    return this.stopped || METRIC_CONDITIONS.includes(this.handle.condition);
  }

  async submitStroke(pixels: Array<[number, number]>, opts: {
    height?: number | null; marks?: [number, number] | null; targetIndex?: number | null;
  } = {}): Promise<StepResponse | null> {
    if (this.stopped || this.busy) return null;
    let demo: DrawnDemo;
    try {
      demo = pointerToDemo(pixels, this.mapping,
                           { height: opts.height ?? null, marks: opts.marks ?? null });
    } catch (err) {
      if (err instanceof TooShortError) {
        this.panels.status.textContent = err.message;
        return null;
      }
      throw err;
    }
    const body: Record<string, unknown> = { t: demo.t, path: demo.path };
    if (opts.targetIndex != null) body.target_index = opts.targetIndex;
    if (demo.marks) {
      body.grab_index = demo.marks[0];
      body.release_index = demo.marks[1];
    }
    this.busy = true;
    try {
      const step = await this.client.submitDemo(this.handle.session_id, body);
      this.consumeStep(step);
      return step;
    } finally {
      this.busy = false;
    }
  }

  consumeStep(step: StepResponse): void {
    this.panels.status.textContent = `demonstrations: ${step.demo_count}`;
    showFeedback(this.panels.feedback, step);
    // only conditions that report metrics contribute to the live history
    if (step.nu !== undefined && step.eta !== undefined && step.classification) {
      this.history.push({
        step: step.demo_count, nu: step.nu, eta: step.eta,
        classification: step.classification,
      });
    }
    renderMetricsPanel(this.panels.metrics, this.history, this.metricsRevealed());
  }

  async stop(): Promise<void> {
    const final = await this.client.stopSession(this.handle.session_id);
    this.stopped = true;
    this.history = final.report.steps;
    this.panels.status.textContent =
      `stopped after ${final.report.steps.length} demonstrations; ` +
      `efficiency ${final.report.final_eta.toFixed(3)}`;
    renderMetricsPanel(this.panels.metrics, this.history, true);
  }
}
