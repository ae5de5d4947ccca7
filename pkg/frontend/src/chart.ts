import { Scale } from "./scale.js";
import { el, px, text, pathFrom } from "./svg.js";

/** Pixel rectangle of one plot panel; y0 is the top edge. */
export interface Box {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export interface Margins {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];
export const GRAY = "#888888";
export const INK = "#222222";

const TICK = 5;

export function plotBox(width: number, height: number, m: Margins): Box {
  return { x0: m.left, x1: width - m.right, y0: m.top, y1: height - m.bottom };
}

export function frameRect(box: Box): string {
  return el("rect", {
    x: box.x0,
    y: box.y0,
    width: box.x1 - box.x0,
    height: box.y1 - box.y0,
    fill: "none",
    stroke: INK,
    "stroke-width": "1",
  });
}

export function grid(x: Scale, y: Scale, box: Box): string {
  const parts: string[] = [];
  for (const t of x.ticks) {
    const gx = x.map(t);
    parts.push(`M${px(gx)},${px(box.y0)} L${px(gx)},${px(box.y1)}`);
  }
  for (const t of y.ticks) {
    const gy = y.map(t);
    parts.push(`M${px(box.x0)},${px(gy)} L${px(box.x1)},${px(gy)}`);
  }
  return el("path", {
    d: parts.join(" "),
    stroke: "#dddddd",
    "stroke-width": "0.5",
    fill: "none",
  });
}

export function xAxis(x: Scale, box: Box, label: string): string {
  const parts: string[] = [];
  for (const t of x.ticks) {
    const gx = x.map(t);
    parts.push(
      el("line", { x1: gx, y1: box.y1, x2: gx, y2: box.y1 + TICK, stroke: INK, "stroke-width": "1" })
    );
    parts.push(
      text(gx, box.y1 + TICK + 11, x.format(t), { "text-anchor": "middle", "font-size": "10", fill: INK })
    );
  }
  parts.push(
    text((box.x0 + box.x1) / 2, box.y1 + TICK + 29, label, {
      "text-anchor": "middle",
      "font-size": "12",
      fill: INK,
    })
  );
  return parts.join("");
}

export function yAxis(y: Scale, box: Box, label: string): string {
  const parts: string[] = [];
  for (const t of y.ticks) {
    const gy = y.map(t);
    parts.push(
      el("line", { x1: box.x0 - TICK, y1: gy, x2: box.x0, y2: gy, stroke: INK, "stroke-width": "1" })
    );
    parts.push(
      text(box.x0 - TICK - 3, gy + 3.5, y.format(t), { "text-anchor": "end", "font-size": "10", fill: INK })
    );
  }
  const lx = box.x0 - 46;
  const ly = (box.y0 + box.y1) / 2;
  parts.push(
    text(lx, ly, label, {
      "text-anchor": "middle",
      "font-size": "12",
      fill: INK,
      transform: `rotate(-90 ${px(lx)} ${px(ly)})`,
    })
  );
  return parts.join("");
}

/** Data polyline clipped to the panel. Clip ids must be unique per document. */
export function seriesLine(
  clipId: string,
  xs: ArrayLike<number>,
  ys: ArrayLike<number>,
  color: string,
  strokeWidth = 1.3,
  dash?: string
): string {
  const attrs: Record<string, string | number> = {
    d: pathFrom(xs, ys),
    stroke: color,
    "stroke-width": String(strokeWidth),
    fill: "none",
    "clip-path": `url(#${clipId})`,
  };
  if (dash) attrs["stroke-dasharray"] = dash;
  return el("path", attrs);
}

export function seriesDots(
  clipId: string,
  xs: ArrayLike<number>,
  ys: ArrayLike<number>,
  color: string,
  radius = 3,
  open = false
): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue;
    parts.push(
      el("circle", {
        cx: xs[i],
        cy: ys[i],
        r: radius,
        fill: open ? "#ffffff" : color,
        stroke: color,
        "stroke-width": "1.2",
        "clip-path": `url(#${clipId})`,
      })
    );
  }
  return parts.join("");
}

export function clipDef(clipId: string, box: Box): string {
  return el(
    "defs",
    {},
    el(
      "clipPath",
      { id: clipId },
      el("rect", { x: box.x0, y: box.y0, width: box.x1 - box.x0, height: box.y1 - box.y0 })
    )
  );
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
  marker?: "line" | "dot" | "open-dot";
}

/** Small legend anchored to the top-right corner of the panel. */
export function legend(box: Box, entries: LegendEntry[]): string {
  const lineH = 16;
  const swatch = 20;
  // generic sans glyphs average about 6 px at font-size 11
  const textW = Math.max(...entries.map((e) => e.label.length)) * 6.2;
  const w = swatch + 8 + textW + 12;
  const h = entries.length * lineH + 8;
  const x = box.x1 - w - 8;
  const y = box.y0 + 8;
  const parts = [
    el("rect", { x, y, width: w, height: h, fill: "#ffffff", stroke: "#bbbbbb", "stroke-width": "0.8" }),
  ];
  entries.forEach((e, i) => {
    const cy = y + 4 + i * lineH + lineH / 2;
    const marker = e.marker ?? "line";
    if (marker === "line") {
      const attrs: Record<string, string | number> = {
        x1: x + 6,
        y1: cy,
        x2: x + 6 + swatch,
        y2: cy,
        stroke: e.color,
        "stroke-width": "1.5",
      };
      if (e.dash) attrs["stroke-dasharray"] = e.dash;
      parts.push(el("line", attrs));
    } else {
      parts.push(
        el("circle", {
          cx: x + 6 + swatch / 2,
          cy,
          r: 3,
          fill: marker === "open-dot" ? "#ffffff" : e.color,
          stroke: e.color,
          "stroke-width": "1.2",
        })
      );
    }
    parts.push(text(x + swatch + 12, cy + 3.5, e.label, { "font-size": "11", fill: INK }));
  });
  return parts.join("");
}

/** Document shell: fixed style, no timestamps, nothing run-dependent. */
export function svgDoc(width: number, height: number, title: string, body: string): string {
  return (
    el(
      "svg",
      {
        xmlns: "http://www.w3.org/2000/svg",
        width: String(width),
        height: String(height),
        viewBox: `0 0 ${width} ${height}`,
        "font-family": "Helvetica, Arial, sans-serif",
      },
      el("rect", { x: "0", y: "0", width: String(width), height: String(height), fill: "#ffffff" }) +
        text(width / 2, 20, title, { "text-anchor": "middle", "font-size": "14", fill: INK }) +
        body
    ) + "\n"
  );
}
