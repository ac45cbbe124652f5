// Freehand demonstration capture: pointer samples in pixels become a
// polyline in task meters with uniformly synthesized timestamps. The server
// remains the authority on everything the drawing means.

import { CanvasMapping } from './geometry';

export interface DrawnDemo {
  t: number[];
  path: number[][];
  /** grab/release indices into `path`, when the raw marks were provided */
  marks?: [number, number];
}

export class TooShortError extends Error {}

export function pointerToDemo(
  pixels: Array<[number, number]>,
  mapping: CanvasMapping,
  opts: { maxPoints?: number; durationS?: number; height?: number | null;
          marks?: [number, number] | null } = {},
): DrawnDemo {
  const maxPoints = opts.maxPoints ?? 120;
  const duration = opts.durationS ?? 4.0;
  if (pixels.length < 2) {
    throw new TooShortError('draw a path, a single click is not a demonstration');
  }
  const stride = Math.max(1, Math.floor(pixels.length / maxPoints));
  const kept: Array<[number, number]> = [];
  const keptRawIdx: number[] = [];
  for (let i = 0; i < pixels.length; i += stride) {
    kept.push(pixels[i]);
    keptRawIdx.push(i);
  }
  if (keptRawIdx[keptRawIdx.length - 1] !== pixels.length - 1) {
    kept.push(pixels[pixels.length - 1]);
    keptRawIdx.push(pixels.length - 1);
  }
  if (kept.length < 2) throw new TooShortError('need at least 2 points');

  const path = kept.map(([xPx, yPx]) => {
    const [x, y] = mapping.toMeters(xPx, yPx);
    return opts.height != null ? [x, y, opts.height] : [x, y];
  });
  const t = kept.map((_, i) => (i / (kept.length - 1)) * duration);

  let marks: [number, number] | undefined;
  if (opts.marks) {
    // raw pointer indices -> nearest kept sample, keeping grab < release
    const toKept = (raw: number) => {
      let best = 0;
      for (let i = 1; i < keptRawIdx.length; i++) {
        if (Math.abs(keptRawIdx[i] - raw) < Math.abs(keptRawIdx[best] - raw)) best = i;
      }
      return best;
    };
    const g = toKept(opts.marks[0]);
    const r = Math.max(toKept(opts.marks[1]), g + 1);
    if (r < kept.length) marks = [g, r];
  }
  return { t, path, marks };
}

/** Attach a pointer listener set to a canvas; onProgress reports the live
 *  sample count while drawing, onDone fires with the raw pixel samples. */
export function attachDrawing(
  canvas: HTMLCanvasElement,
  onDone: (pixels: Array<[number, number]>) => void,
  onProgress?: (count: number) => void,
): () => void {
  let stroke: Array<[number, number]> | null = null;

  const down = (ev: PointerEvent) => {
    stroke = [[ev.offsetX, ev.offsetY]];
    onProgress?.(1);
  };
  const move = (ev: PointerEvent) => {
    if (stroke) {
      stroke.push([ev.offsetX, ev.offsetY]);
      onProgress?.(stroke.length);
    }
  };
  const up = () => {
    if (stroke) onDone(stroke);
    stroke = null;
  };
  canvas.addEventListener('pointerdown', down);
  canvas.addEventListener('pointermove', move);
  canvas.addEventListener('pointerup', up);
  return () => {
    canvas.removeEventListener('pointerdown', down);
    canvas.removeEventListener('pointermove', move);
    canvas.removeEventListener('pointerup', up);
  };
}
