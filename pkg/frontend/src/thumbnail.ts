/** Tiny OBJ wireframe thumbnails: front-view orthographic projection. */

export interface Projected {
  points: Array<[number, number]>;
  edges: Array<[number, number]>;
}

/** Parse `v`/`f` lines and project onto the x/y (front) plane, normalized to [0,1]. */
export function projectObjFront(objText: string, maxEdges = 4000): Projected {
  const verts: Array<[number, number]> = [];
  const edges: Array<[number, number]> = [];
  for (const line of objText.split('\n')) {
    const parts = line.trim().split(/\s+/);
    if (parts[0] === 'v' && parts.length >= 4) {
      verts.push([Number(parts[1]), Number(parts[2])]);
    } else if (parts[0] === 'f' && parts.length >= 4 && edges.length < maxEdges) {
      const idx = parts.slice(1).map((p) => Number(p.split('/')[0]) - 1);
      for (let i = 0; i < idx.length; i++) {
        edges.push([idx[i], idx[(i + 1) % idx.length]]);
      }
    }
  }
  if (verts.length === 0) return { points: [], edges: [] };
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const [x, y] of verts) {
    xMin = Math.min(xMin, x);
    xMax = Math.max(xMax, x);
    yMin = Math.min(yMin, y);
    yMax = Math.max(yMax, y);
  }
  const span = Math.max(xMax - xMin, yMax - yMin, 1e-9);
  const cx = (xMin + xMax) / 2;
  const cy = (yMin + yMax) / 2;
  const points = verts.map(
    ([x, y]): [number, number] => [0.5 + (x - cx) / span, 0.5 - (y - cy) / span],
  );
  return { points, edges };
}

export function drawThumbnail(canvas: HTMLCanvasElement, proj: Projected): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  const pad = 4;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = '#4a6a8a';
  ctx.lineWidth = 0.4;
  ctx.beginPath();
  for (const [a, b] of proj.edges) {
    const pa = proj.points[a];
    const pb = proj.points[b];
    if (!pa || !pb) continue;
    ctx.moveTo(pad + pa[0] * (w - 2 * pad), pad + pa[1] * (h - 2 * pad));
    ctx.lineTo(pad + pb[0] * (w - 2 * pad), pad + pb[1] * (h - 2 * pad));
  }
  ctx.stroke();
}
