import type { SeriesPoint } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartLayout {
  width: number;
  height: number;
  padding: number;
}

export const DEFAULT_LAYOUT: ChartLayout = { width: 640, height: 280, padding: 36 };

/** Log scale is only offered when every objective is strictly positive. */
export function canUseLogScale(series: SeriesPoint[]): boolean {
  return series.length > 0 && series.every(([, v]) => v > 0);
}

export interface StepGeometry {
  /** pixel coordinates of the step polyline, in trial order */
  points: Array<{ x: number; y: number }>;
  path: string;
}

/** Map the incumbent series to a step polyline in SVG pixel space. */
export function stepGeometry(
  series: SeriesPoint[],
  layout: ChartLayout = DEFAULT_LAYOUT,
  log = false,
): StepGeometry {
  if (series.length === 0) return { points: [], path: "" };
  const xs = series.map(([t]) => t);
  const raw = series.map(([, v]) => v);
  const ys = log ? raw.map(Math.log10) : raw;
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const inner = {
    w: layout.width - 2 * layout.padding,
    h: layout.height - 2 * layout.padding,
  };
  const px = (t: number) => layout.padding + ((t - xMin) / xSpan) * inner.w;
  // SVG y grows downward: larger objectives sit higher on screen (smaller y)
  const py = (v: number) => layout.padding + ((yMax - v) / ySpan) * inner.h;

  const points = series.map(([t], i) => ({ x: px(t), y: py(ys[i]) }));
  const commands: string[] = [`M ${points[0].x.toFixed(2)} ${points[0].y.toFixed(2)}`];
  for (let i = 1; i < points.length; i++) {
    // horizontal run at the previous incumbent, then the vertical drop
    commands.push(`H ${points[i].x.toFixed(2)}`);
    commands.push(`V ${points[i].y.toFixed(2)}`);
  }
  return { points, path: commands.join(" ") };
}

/** Render the convergence chart; replaces the container's contents. */
export function renderConvergence(
  container: HTMLElement,
  series: SeriesPoint[],
  options: { log?: boolean; layout?: ChartLayout } = {},
): void {
  container.replaceChildren();
  if (series.length === 0) {
    const empty = document.createElement("p");
    empty.className = "chart-empty";
    empty.textContent = "No successful trials yet.";
    container.appendChild(empty);
    return;
  }
  const layout = options.layout ?? DEFAULT_LAYOUT;
  const log = options.log ?? false;
  const geometry = stepGeometry(series, layout, log);

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${layout.width} ${layout.height}`);
  svg.setAttribute("class", "convergence-chart");
  svg.setAttribute("role", "img");

  const axes = document.createElementNS(SVG_NS, "path");
  const x0 = layout.padding;
  const y1 = layout.height - layout.padding;
  axes.setAttribute(
    "d",
    `M ${x0} ${layout.padding} V ${y1} H ${layout.width - layout.padding}`,
  );
  axes.setAttribute("class", "chart-axes");
  svg.appendChild(axes);

  const line = document.createElementNS(SVG_NS, "path");
  line.setAttribute("d", geometry.path);
  line.setAttribute("class", "chart-line");
  line.setAttribute("fill", "none");
  svg.appendChild(line);

  const first = series[0];
  const last = series[series.length - 1];
  const label = document.createElementNS(SVG_NS, "text");
  label.setAttribute("x", String(layout.width - layout.padding));
  label.setAttribute("y", String(layout.padding - 8));
  label.setAttribute("text-anchor", "end");
  label.setAttribute("class", "chart-label");
  label.textContent = `incumbent ${last[1]} @ trial ${last[0]} (first ${first[1]})`;
  svg.appendChild(label);

  container.appendChild(svg);
}
