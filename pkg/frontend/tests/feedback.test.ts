import { describe, expect, it, vi } from 'vitest';

import { replayView, showFeedback } from '../src/feedback';
import { metricsChart } from '../src/metrics';
import { RealizationPayload, StepResponse } from '../src/types';

function realization(item: number, ok: boolean, n = 5): RealizationPayload {
  return {
    test_item: item,
    membership: { is_member: ok, violated: ok ? [] : ['EndCondition'] },
    trajectory: {
      t: Array.from({ length: n }, (_, i) => i),
      pos: Array.from({ length: n }, (_, i) => [i * 0.01, i * 0.02]),
    },
  };
}

describe('showFeedback', () => {
  it('BF lists exactly the probe outcomes', () => {
    const panel = document.createElement('div');
    const step: StepResponse = {
      ok: true, demo_count: 1, state: 'Teaching', condition: 'BF',
      classification: { label: 'Informative', delta_nu: 0.1, similarity: 9 },
      realizations: [realization(0, false), realization(9, true),
                     realization(90, true), realization(99, false),
                     realization(44, true)],
    };
    showFeedback(panel, step);
    const rows = panel.querySelectorAll('.probe');
    expect(rows.length).toBe(5);
    expect(rows[0].textContent).toContain('plant 0: failure');
    expect(rows[1].textContent).toContain('plant 9: success');
  });

  it('RF replay animation traces the returned trajectory points', async () => {
    vi.useFakeTimers();
    const view = replayView(realization(7, true, 4), 10);
    document.body.replaceChildren(view);
    vi.advanceTimersByTime(100);
    const dots = view.querySelectorAll('.replay-dot');
    expect(dots.length).toBe(4);
    expect(dots[2].getAttribute('data-x')).toBe('0.02');
    expect(dots[2].getAttribute('data-y')).toBe('0.04');
    vi.useRealTimers();
  });
});

describe('metricsChart', () => {
  it('renders an empty chart without crashing', () => {
    expect(metricsChart([])).toContain('<svg');
  });

  it('marks non-informative steps with badges', () => {
    const svg = metricsChart([
      { step: 1, nu: 0.2, eta: 0.2,
        classification: { label: 'Informative', delta_nu: 0.2, similarity: 9 } },
      { step: 2, nu: 0.2, eta: 0.1,
        classification: { label: 'Ambiguous', delta_nu: 0, similarity: 0 } },
    ]);
    expect(svg).toContain('badge-ambiguous');
    expect(svg).not.toContain('badge-informative');
  });
});
