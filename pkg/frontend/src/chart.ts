/** Dependency-free SVG line chart for the learning curve. */

import type { CurvePoint } from "./api.js";

export interface ChartGeometry {
  width: number;
  height: number;
  padding: number;
}

const DEFAULT_GEOMETRY: ChartGeometry = { width: 420, height: 220, padding: 32 };

export function curveCoordinates(
  points: { num_labeled: number; accuracy: number }[],
  geometry: ChartGeometry = DEFAULT_GEOMETRY,
): [number, number][] {
  const { width, height, padding } = geometry;
  const xs = points.map((p) => p.num_labeled);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const span = xMax > xMin ? xMax - xMin : 1;
  return points.map((p) => [
    padding + ((p.num_labeled - xMin) / span) * (width - 2 * padding),
    height - padding - p.accuracy * (height - 2 * padding),
  ]);
}

export function renderCurveSvg(curve: CurvePoint[], geometry: ChartGeometry = DEFAULT_GEOMETRY): string {
  const points = curve.filter((p): p is { num_labeled: number; accuracy: number } =>
    typeof p.accuracy === "number",
  );
  if (points.length === 0) {
    return `<p class="no-accuracy">no accuracy available</p>`;
  }
  const { width, height, padding } = geometry;
  const coords = curveCoordinates(points, geometry);
  const path = coords.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
  const dots = coords
    .map(
      ([x, y], i) =>
        `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="3" data-num-labeled="${points[i].num_labeled}" data-accuracy="${points[i].accuracy}"><title>${points[i].num_labeled}: ${points[i].accuracy.toFixed(3)}</title></circle>`,
    )
    .join("");
  const last = points[points.length - 1];
  return `<svg class="curve" viewBox="0 0 ${width} ${height}" role="img" aria-label="learning curve">
  <line x1="${padding}" y1="${height - padding}" x2="${width - padding}" y2="${height - padding}" class="axis"/>
  <line x1="${padding}" y1="${padding}" x2="${padding}" y2="${height - padding}" class="axis"/>
  <polyline fill="none" class="curve-line" points="${path}"/>
  ${dots}
  <text x="${width - padding}" y="${height - 8}" text-anchor="end" class="axis-label">labeled</text>
  <text x="${padding}" y="${padding - 8}" class="axis-label">accuracy (last ${last.accuracy.toFixed(3)})</text>
</svg>`;
}
