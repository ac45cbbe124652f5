// Affine mapping between canvas pixels and task meters. The task workspace
// is fitted to the canvas with y flipped (task y grows upward).

export interface Workspace {
  xmin: number;
  ymin: number;
  xmax: number;
  ymax: number;
}

export class CanvasMapping {
  constructor(
    readonly workspace: Workspace,
    readonly widthPx: number,
    readonly heightPx: number,
  ) {}

  toMeters(xPx: number, yPx: number): [number, number] {
    const w = this.workspace;
    const x = w.xmin + (xPx / this.widthPx) * (w.xmax - w.xmin);
    const y = w.ymax - (yPx / this.heightPx) * (w.ymax - w.ymin);
    return [x, y];
  }

  toPixels(x: number, y: number): [number, number] {
    const w = this.workspace;
    const xPx = ((x - w.xmin) / (w.xmax - w.xmin)) * this.widthPx;
    const yPx = ((w.ymax - y) / (w.ymax - w.ymin)) * this.heightPx;
    return [xPx, yPx];
  }
}

export const MAZE_WORKSPACE: Workspace = { xmin: 0, ymin: 0, xmax: 0.2, ymax: 0.3 };
export const TRAY_WORKSPACE: Workspace = { xmin: 0, ymin: -0.45, xmax: 0.9, ymax: 0.45 };
