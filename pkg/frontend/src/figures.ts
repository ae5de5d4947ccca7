import * as fs from "node:fs";
import * as path from "node:path";

import { readTable, column, requireColumns, Table } from "./csv.js";
import { extent, padded, linearScale, logScale, Scale } from "./scale.js";
import {
  Box,
  GRAY,
  INK,
  LegendEntry,
  PALETTE,
  clipDef,
  frameRect,
  grid,
  legend,
  plotBox,
  seriesDots,
  seriesLine,
  svgDoc,
  xAxis,
  yAxis,
} from "./chart.js";
import { text } from "./svg.js";

export type FigureId = "fig2" | "fig3a" | "fig3bc" | "fig3d" | "fig4";

export interface RenderOptions {
  /** Crop the PSD overlay (fig3d) to frequencies at or below this. */
  fmaxHz?: number;
}

/** One render request: which figure, where its CSVs live, where to put it. */
export interface FigureSpec {
  figure: FigureId;
  inputDir: string;
  /** Per-name path overrides for callers not using the directory layout. */
  files?: Record<string, string>;
  output?: string;
  options?: RenderOptions;
}

/** Input CSVs each figure reads, by their conventional names. */
export const FIGURE_INPUTS: Record<FigureId, string[]> = {
  fig2: ["intensity.csv"],
  fig3a: ["profile.csv", "profile_static.csv"],
  fig3bc: ["timeseries_0.csv", "timeseries_1.csv"],
  fig3d: ["psd_0.csv", "psd_1.csv", "psd_2.csv"],
  fig4: ["sensitivity.csv"],
};

const WIDTH = 800;
const MARGINS = { top: 36, right: 24, bottom: 56, left: 76 };

type Resolve = (name: string) => string;

function mapAll(values: ArrayLike<number>, s: Scale): number[] {
  const out = new Array<number>(values.length);
  for (let i = 0; i < values.length; i++) out[i] = s.map(values[i]);
  return out;
}

function fig2(resolve: Resolve): string {
  const t = readTable(resolve("intensity.csv"));
  requireColumns(t, ["tap", "z_m", "intensity_db"]);
  const z = column(t, "z_m");
  const db = column(t, "intensity_db");

  const box = plotBox(WIDTH, 480, MARGINS);
  const x = linearScale(extent(z, "z_m"), [box.x0, box.x1]);
  const y = linearScale(padded(extent(db, "intensity_db")), [box.y1, box.y0]);

  const body =
    clipDef("c0", box) +
    grid(x, y, box) +
    seriesLine("c0", mapAll(z, x), mapAll(db, y), PALETTE[0]) +
    frameRect(box) +
    xAxis(x, box, "distance z (m)") +
    yAxis(y, box, "backscatter intensity (dB)");
  return svgDoc(WIDTH, 480, "Backscatter intensity profile", body);
}

function fig3a(resolve: Resolve): string {
  const dyn = readTable(resolve("profile.csv"));
  const sta = readTable(resolve("profile_static.csv"));
  for (const t of [dyn, sta]) requireColumns(t, ["segment", "z_m", "stddev_rad"]);

  const zd = column(dyn, "z_m");
  const sd = column(dyn, "stddev_rad");
  const zs = column(sta, "z_m");
  const ss = column(sta, "stddev_rad");

  const box = plotBox(WIDTH, 480, MARGINS);
  const [zlo, zhi] = extent(zd, "z_m");
  const [slo, shi] = extent(zs, "z_m");
  const x = linearScale([Math.min(zlo, slo), Math.max(zhi, shi)], [box.x0, box.x1]);
  const top = Math.max(extent(sd, "stddev_rad")[1], extent(ss, "stddev_rad")[1]);
  const y = linearScale([0, top * 1.05], [box.y1, box.y0]);

  const body =
    clipDef("c0", box) +
    grid(x, y, box) +
    seriesLine("c0", mapAll(zs, x), mapAll(ss, y), GRAY, 1.3, "5 3") +
    seriesLine("c0", mapAll(zd, x), mapAll(sd, y), PALETTE[0]) +
    frameRect(box) +
    xAxis(x, box, "distance z (m)") +
    yAxis(y, box, "StDv of differential phase (rad)") +
    legend(box, [
      { label: "perturbed", color: PALETTE[0] },
      { label: "static", color: GRAY, dash: "5 3" },
    ]);
  return svgDoc(WIDTH, 480, "Differential-phase StDv profile", body);
}

function fig3bc(resolve: Resolve): string {
  const tables = ["timeseries_0.csv", "timeseries_1.csv"].map((n) => readTable(resolve(n)));
  for (const t of tables) requireColumns(t, ["frame", "t_s", "dphi_rad"]);

  const height = 560;
  // two stacked panels sharing the time axis
  const gap = 26;
  const panelH = (height - MARGINS.top - MARGINS.bottom - gap) / 2;
  const boxes: Box[] = [0, 1].map((i) => ({
    x0: MARGINS.left,
    x1: WIDTH - MARGINS.right,
    y0: MARGINS.top + i * (panelH + gap),
    y1: MARGINS.top + i * (panelH + gap) + panelH,
  }));

  let tlo = Infinity;
  let thi = -Infinity;
  for (const t of tables) {
    const [lo, hi] = extent(column(t, "t_s"), "t_s");
    tlo = Math.min(tlo, lo * 1e3);
    thi = Math.max(thi, hi * 1e3);
  }

  let body = "";
  tables.forEach((t, i) => {
    const box = boxes[i];
    const ms = Array.from(column(t, "t_s"), (v) => v * 1e3);
    const ph = column(t, "dphi_rad");
    const x = linearScale([tlo, thi], [box.x0, box.x1]);
    const y = linearScale(padded(extent(ph, "dphi_rad")), [box.y1, box.y0], 5);
    body +=
      clipDef(`c${i}`, box) +
      grid(x, y, box) +
      seriesLine(`c${i}`, mapAll(ms, x), mapAll(ph, y), PALETTE[i], 1.0) +
      frameRect(box) +
      yAxis(y, box, "diff. phase (rad)") +
      text(box.x0 + 8, box.y0 + 14, `monitored position ${i}`, { "font-size": "11", fill: INK });
    if (i === tables.length - 1) body += xAxis(x, box, "time (ms)");
  });
  return svgDoc(WIDTH, height, "Differential phase at the monitored positions", body);
}

function fig3d(resolve: Resolve, opts: RenderOptions): string {
  const names = FIGURE_INPUTS.fig3d;
  const tables = names.map((n) => readTable(resolve(n)));
  for (const t of tables) requireColumns(t, ["freq_hz", "psd_rad2_per_hz", "psd_db"]);

  const fmax = opts.fmaxHz;
  const series = tables.map((t) => {
    let f = Array.from(column(t, "freq_hz"));
    let db = Array.from(column(t, "psd_db"));
    if (fmax !== undefined) {
      const keep = f.map((v) => v <= fmax);
      f = f.filter((_, i) => keep[i]);
      db = db.filter((_, i) => keep[i]);
      if (f.length === 0) throw new Error(`no PSD bins at or below ${fmax} Hz`);
    }
    return { f, db };
  });

  const box = plotBox(WIDTH, 480, MARGINS);
  let flo = Infinity;
  let fhi = -Infinity;
  let dlo = Infinity;
  let dhi = -Infinity;
  for (const s of series) {
    const [a, b] = extent(s.f, "freq_hz");
    flo = Math.min(flo, a);
    fhi = Math.max(fhi, b);
    const [c, d] = extent(s.db, "psd_db");
    dlo = Math.min(dlo, c);
    dhi = Math.max(dhi, d);
  }
  const x = linearScale([flo, fhi], [box.x0, box.x1]);
  const y = linearScale(padded([dlo, dhi]), [box.y1, box.y0]);

  let body = clipDef("c0", box) + grid(x, y, box);
  series.forEach((s, i) => {
    body += seriesLine("c0", mapAll(s.f, x), mapAll(s.db, y), PALETTE[i], 1.1);
  });
  body +=
    frameRect(box) +
    xAxis(x, box, "frequency (Hz)") +
    yAxis(y, box, "PSD (dB rad²/Hz)") +
    legend(
      box,
      series.map((_, i) => ({ label: `position ${i}`, color: PALETTE[i] }))
    );
  return svgDoc(WIDTH, 480, "Differential-phase PSD overlay", body);
}

function fig4(resolve: Resolve): string {
  const t = readTable(resolve("sensitivity.csv"));
  requireColumns(t, ["dl_pp_m", "measured_rad_pp", "theory_rad_pp", "below_detection"]);

  const dl = column(t, "dl_pp_m");
  const meas = column(t, "measured_rad_pp");
  const theo = column(t, "theory_rad_pp");
  const below = column(t, "below_detection");

  const order = Array.from(dl.keys()).sort((a, b) => dl[a] - dl[b]);
  const dls = order.map((i) => dl[i]);
  const theos = order.map((i) => theo[i]);

  const box = plotBox(WIDTH, 480, MARGINS);
  const x = logScale(extent(dl, "dl_pp_m"), [box.x0, box.x1]);
  const pos: number[] = [];
  for (const arr of [meas, theo]) for (const v of arr) if (v > 0) pos.push(v);
  const y = logScale(extent(pos, "phase columns"), [box.y1, box.y0]);

  // log mapping turns nonpositive values into NaN, which the helpers skip
  const mx = mapAll(dl, x);
  const my = mapAll(meas, y);
  const solidX: number[] = [];
  const solidY: number[] = [];
  const openX: number[] = [];
  const openY: number[] = [];
  for (let i = 0; i < mx.length; i++) {
    (below[i] !== 0 ? openX : solidX).push(mx[i]);
    (below[i] !== 0 ? openY : solidY).push(my[i]);
  }

  const entries: LegendEntry[] = [
    { label: "measured", color: PALETTE[0], marker: "dot" },
    { label: "theory dφ = 4πnξ·dL/λ", color: GRAY },
  ];
  if (openX.length > 0) {
    entries.push({ label: "below detection", color: PALETTE[0], marker: "open-dot" });
  }

  const body =
    clipDef("c0", box) +
    grid(x, y, box) +
    seriesLine("c0", mapAll(dls, x), mapAll(theos, y), GRAY, 1.5) +
    seriesDots("c0", solidX, solidY, PALETTE[0]) +
    seriesDots("c0", openX, openY, PALETTE[0], 3, true) +
    frameRect(box) +
    xAxis(x, box, "applied pk-pk length change dL (m)") +
    yAxis(y, box, "pk-pk differential phase (rad)") +
    legend(box, entries);
  return svgDoc(WIDTH, 480, "Measured phase vs applied length change", body);
}

const BUILDERS: Record<FigureId, (resolve: Resolve, opts: RenderOptions) => string> = {
  fig2: (r) => fig2(r),
  fig3a: (r) => fig3a(r),
  fig3bc: (r) => fig3bc(r),
  fig3d,
  fig4: (r) => fig4(r),
};

export function isFigureId(name: string): name is FigureId {
  return name in BUILDERS;
}

/** Render one figure to an SVG string, writing spec.output when set. */
export function render(spec: FigureSpec): string {
  if (!isFigureId(spec.figure)) {
    throw new Error(`unknown figure "${spec.figure}" (know: ${Object.keys(BUILDERS).join(", ")})`);
  }
  const resolve: Resolve = (name) =>
    spec.files?.[name] ?? path.join(spec.inputDir, name);
  const svg = BUILDERS[spec.figure](resolve, spec.options ?? {});
  if (spec.output !== undefined) {
    fs.writeFileSync(spec.output, svg, "utf8");
  }
  return svg;
}
