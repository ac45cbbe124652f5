// Live metrics chart: per-step efficacy and efficiency polylines plus
// failure badges, drawn as a small SVG from service-reported numbers only.

import { StepMetrics } from './types';

const W = 420;
const H = 220;
const M = 30;

function pt(step: number, value: number, maxStep: number): string {
  const x = M + ((step - 1) / Math.max(maxStep - 1, 1)) * (W - 2 * M);
  const y = H - M - value * (H - 2 * M);
  return `${x.toFixed(1)},${y.toFixed(1)}`;
}

export function metricsChart(history: StepMetrics[]): string {
  if (history.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}"></svg>`;
  }
  const maxStep = history[history.length - 1].step;
  const nuPts = history.map((s) => pt(s.step, s.nu, maxStep)).join(' ');
  const etaPts = history.map((s) => pt(s.step, s.eta, maxStep)).join(' ');
  const badges = history
    .filter((s) => s.classification.label !== 'Informative')
    .map((s) => {
      const [x, y] = pt(s.step, s.nu, maxStep).split(',');
      return `<text x="${x}" y="${parseFloat(y) - 8}" font-size="10" ` +
        `class="badge badge-${s.classification.label.toLowerCase()}">` +
        `${s.classification.label}</text>`;
    })
    .join('');
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">` +
    `<path d="M ${M} ${M} V ${H - M} H ${W - M}" stroke="#000" fill="none"/>` +
    `<polyline points="${nuPts}" fill="none" stroke="#1f77b4" stroke-width="2"/>` +
    `<polyline points="${etaPts}" fill="none" stroke="#1f77b4" stroke-width="2" stroke-dasharray="5 3"/>` +
    badges +
    `</svg>`;
}

export function renderMetricsPanel(panel: HTMLElement, history: StepMetrics[],
                                   revealed: boolean): void {
  panel.replaceChildren();
  if (!revealed) {
    const note = document.createElement('p');
    note.className = 'metrics-hidden';
    note.textContent = 'metrics are revealed when the session ends';
    panel.appendChild(note);
    return;
  }
  const holder = document.createElement('div');
  holder.className = 'metrics-chart';
  holder.innerHTML = metricsChart(history);
  panel.appendChild(holder);
  const list = document.createElement('ul');
  list.className = 'metrics-history';
  for (const s of history) {
    const item = document.createElement('li');
    item.textContent =
      `step ${s.step}: efficacy ${s.nu.toFixed(3)}, efficiency ${s.eta.toFixed(3)}` +
      (s.classification.label !== 'Informative' ? ` [${s.classification.label}]` : '');
    list.appendChild(item);
  }
  panel.appendChild(list);
}
