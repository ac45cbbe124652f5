// Condition-appropriate feedback rendering. Every number and color shown
// here is copied from a service response field, never computed locally.

import { RealizationPayload, StepResponse } from './types';

export const SUCCESS_COLOR = '#2ca02c';
export const FAIL_COLOR = '#d62728';

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function showFeedback(panel: HTMLElement, step: StepResponse): void {
  panel.replaceChildren();
  switch (step.condition) {
    case 'NF':
      panel.appendChild(el('p', 'demo-count',
        `demonstration ${step.demo_count} recorded`));
      return;
    case 'VF':
    case 'VR': {
      const outcomes = step.outcomes ?? [];
      const okCount = outcomes.filter(Boolean).length;
      panel.appendChild(el('p', 'success-counter',
        `${okCount}/${outcomes.length} test starts succeed`));
      const strip = el('div', 'outcome-strip');
      outcomes.forEach((okFlag, i) => {
        const dot = el('span', okFlag ? 'outcome ok' : 'outcome fail');
        dot.dataset.item = String(i);
        dot.style.backgroundColor = okFlag ? SUCCESS_COLOR : FAIL_COLOR;
        strip.appendChild(dot);
      });
      panel.appendChild(strip);
      if (step.svg) {
        const holder = el('div', 'svg-holder');
        holder.innerHTML = step.svg;
        panel.appendChild(holder);
      }
      return;
    }
    case 'RF': {
      const rec = (step.realizations ?? [])[0];
      if (rec) panel.appendChild(replayView(rec));
      return;
    }
    case 'BF': {
      const list = el('div', 'probe-list');
      (step.realizations ?? []).forEach((rec) => {
        const okFlag = rec.membership.is_member;
        const row = el('div', okFlag ? 'probe ok' : 'probe fail',
          `plant ${rec.test_item}: ${okFlag ? 'success' : 'failure'}`);
        row.style.color = okFlag ? SUCCESS_COLOR : FAIL_COLOR;
        list.appendChild(row);
      });
      panel.appendChild(list);
      return;
    }
    case 'SF':
      panel.appendChild(el('p', 'demo-count',
        `demonstration ${step.demo_count} recorded; pick a plant to test`));
      return;
  }
}

/** Replay animation: steps a marker along the returned realization points. */
export function replayView(rec: RealizationPayload, tickMs = 30): HTMLElement {
  const holder = el('div', 'replay');
  const okFlag = rec.membership.is_member;
  holder.appendChild(el('p', okFlag ? 'replay ok' : 'replay fail',
    `replay of plant ${rec.test_item}: ${okFlag ? 'success' : 'failure'}`));
  const trace = el('div', 'replay-trace');
  trace.dataset.points = String(rec.trajectory.pos.length);
  holder.appendChild(trace);
  let i = 0;
  const timer = setInterval(() => {
    if (i >= rec.trajectory.pos.length) {
      clearInterval(timer);
      return;
    }
    const p = rec.trajectory.pos[i];
    const dot = el('span', 'replay-dot');
    dot.dataset.x = String(p[0]);
    dot.dataset.y = String(p[1]);
    trace.appendChild(dot);
    i += 1;
  }, tickMs);
  return holder;
}
