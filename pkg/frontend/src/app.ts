// Bootstraps the console: scenario/condition pickers, the drawing canvas
// (top-down view; pick-and-place adds a height slider and grab/release
// buttons standing in for the gripper cuff button), and the panels.

import { Client } from './api';
import { attachDrawing } from './drawing';
import { CanvasMapping, MAZE_WORKSPACE, TRAY_WORKSPACE } from './geometry';
import { UiSession } from './session';
import { ScenarioInfo } from './types';

export async function boot(root: HTMLElement, client = new Client('')): Promise<void> {
  root.innerHTML = `
    <div class="controls">
      <select id="scenario"></select>
      <select id="condition"></select>
      <button id="start">start session</button>
      <button id="stop" disabled>stop session</button>
    </div>
    <div class="workspace">
      <canvas id="canvas" width="400" height="600"></canvas>
      <div class="pick-controls" hidden>
        <label>height <input id="height" type="range" min="0.02" max="0.30"
          step="0.01" value="0.10"></label>
        <label>plant <input id="target" type="number" min="0" max="99" value="0"></label>
        <button id="grab">grab</button>
        <button id="release">release</button>
      </div>
    </div>
    <p id="status">no session</p>
    <div id="feedback"></div>
    <div id="metrics"></div>
  `;

  const pick = <T extends HTMLElement>(sel: string) => root.querySelector(sel) as T;
  const scenarioSel = pick<HTMLSelectElement>('#scenario');
  const conditionSel = pick<HTMLSelectElement>('#condition');
  const canvas = pick<HTMLCanvasElement>('#canvas');
  const pickControls = pick<HTMLDivElement>('.pick-controls');
  const startBtn = pick<HTMLButtonElement>('#start');
  const stopBtn = pick<HTMLButtonElement>('#stop');

  const { scenarios } = await client.scenarios();
  const byId = new Map<string, ScenarioInfo>();
  for (const sc of scenarios) {
    byId.set(sc.id, sc);
    scenarioSel.appendChild(new Option(sc.name, sc.id));
  }
  const refreshConditions = () => {
    conditionSel.replaceChildren();
    const sc = byId.get(scenarioSel.value);
    for (const c of sc?.conditions ?? []) conditionSel.appendChild(new Option(c, c));
    pickControls.hidden = sc?.kind !== 'pickplace';
  };
  scenarioSel.addEventListener('change', refreshConditions);
  refreshConditions();

  let session: UiSession | null = null;
  let marks: [number, number] | null = null;
  let liveLen = 0;   // samples in the stroke being drawn right now

  startBtn.addEventListener('click', async () => {
    const sc = byId.get(scenarioSel.value);
    if (!sc) return;
    const handle = await client.createSession(sc.id, conditionSel.value);
    const workspace = sc.kind === 'maze' ? MAZE_WORKSPACE : TRAY_WORKSPACE;
    const mapping = new CanvasMapping(workspace, canvas.width, canvas.height);
    session = new UiSession(client, handle, mapping, {
      feedback: pick('#feedback'),
      metrics: pick('#metrics'),
      status: pick('#status'),
    });
    pick('#status').textContent = `session ${handle.session_id} (${handle.condition})`;
    stopBtn.disabled = false;
    marks = null;
  });

  // grab/release press while drawing marks the current sample, like the
  // gripper button on a robot cuff
  pick<HTMLButtonElement>('#grab').addEventListener('click', () => {
    marks = [Math.max(liveLen - 1, 0), Math.max(liveLen, 1)];
  });
  pick<HTMLButtonElement>('#release').addEventListener('click', () => {
    if (marks) marks = [marks[0], Math.max(liveLen - 1, marks[0] + 1)];
  });

  attachDrawing(canvas, (pixels) => {
    if (!session) return;
    const sc = byId.get(scenarioSel.value);
    const isPick = sc?.kind === 'pickplace';
    void session.submitStroke(pixels, {
      height: isPick ? Number(pick<HTMLInputElement>('#height').value) : null,
      marks: isPick ? marks : null,
      targetIndex: isPick ? Number(pick<HTMLInputElement>('#target').value) : null,
    });
    marks = null;
  }, (count) => {
    liveLen = count;
  });

  stopBtn.addEventListener('click', async () => {
    if (session) {
      await session.stop();
      stopBtn.disabled = true;
    }
  });
}
