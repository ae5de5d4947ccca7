import { scaleLinear } from "d3-scale";

/** Maps data values onto pixel coordinates along one axis. */
export interface Scale {
  map(v: number): number;
  ticks: number[];
  format(v: number): string;
  domain: [number, number];
}

/** Finite min/max of a column; throws if nothing finite is left. */
export function extent(values: ArrayLike<number>, what = "data"): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) throw new Error(`no finite values in ${what}`);
  if (lo === hi) {
    // degenerate span, widen symmetrically so the scale stays invertible
    const pad = lo === 0 ? 1 : Math.abs(lo) * 0.05;
    return [lo - pad, hi + pad];
  }
  return [lo, hi];
}

/** Widen a span by a fraction on both ends. */
export function padded([lo, hi]: [number, number], frac = 0.05): [number, number] {
  const d = (hi - lo) * frac;
  return [lo - d, hi + d];
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
  tickCount = 6,
  nice = true
): Scale {
  const s = scaleLinear().domain(domain).range(range);
  if (nice) s.nice(tickCount);
  const fmt = s.tickFormat(tickCount);
  return {
    map: (v) => s(v),
    ticks: s.ticks(tickCount),
    format: (v) => fmt(v),
    domain: s.domain() as [number, number],
  };
}

/** Log10 scale with full-decade ticks; domain must be positive. */
export function logScale(domain: [number, number], range: [number, number]): Scale {
  let [lo, hi] = domain;
  if (!(lo > 0) || !(hi > 0)) {
    throw new Error(`log scale needs a positive domain, got [${lo}, ${hi}]`);
  }
  // snap outward to decades so every tick lands on the frame
  lo = Math.pow(10, Math.floor(Math.log10(lo) + 1e-12));
  hi = Math.pow(10, Math.ceil(Math.log10(hi) - 1e-12));
  const la = Math.log10(lo);
  const lb = Math.log10(hi);
  const ticks: number[] = [];
  for (let e = Math.round(la); e <= Math.round(lb); e++) ticks.push(Math.pow(10, e));
  return {
    map: (v) => range[0] + ((Math.log10(v) - la) / (lb - la)) * (range[1] - range[0]),
    ticks,
    format: (v) => formatDecade(v),
    domain: [lo, hi],
  };
}

function formatDecade(v: number): string {
  const e = Math.round(Math.log10(v));
  if (e >= -3 && e <= 3) return String(v);
  return `1e${e}`;
}
