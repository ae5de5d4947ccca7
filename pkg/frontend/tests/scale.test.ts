import { describe, expect, it } from "vitest";

import { extent, linearScale, logScale, padded } from "../src/scale.js";
import { pathFrom, px, esc } from "../src/svg.js";

describe("extent", () => {
  it("ignores non-finite values", () => {
    expect(extent([NaN, 3, -Infinity, 7, Infinity])).toEqual([3, 7]);
  });

  it("throws when nothing finite remains", () => {
    expect(() => extent([NaN, Infinity], "psd_db")).toThrow(/no finite values in psd_db/);
  });

  it("widens a degenerate span", () => {
    const [lo, hi] = extent([5, 5, 5]);
    expect(lo).toBeLessThan(5);
    expect(hi).toBeGreaterThan(5);
    const [zlo, zhi] = extent([0, 0]);
    expect(zhi - zlo).toBeGreaterThan(0);
  });

  it("padded widens both ends by the fraction", () => {
    expect(padded([0, 10], 0.1)).toEqual([-1, 11]);
  });
});

describe("linearScale", () => {
  it("maps domain ends onto range ends when not niced", () => {
    const s = linearScale([0, 10], [100, 700], 6, false);
    expect(s.map(0)).toBe(100);
    expect(s.map(10)).toBe(700);
    expect(s.map(5)).toBe(400);
  });

  it("nices the domain to cover the data and keeps ticks inside", () => {
    const s = linearScale([0.13, 297.2], [0, 1]);
    expect(s.domain[0]).toBeLessThanOrEqual(0.13);
    expect(s.domain[1]).toBeGreaterThanOrEqual(297.2);
    for (const t of s.ticks) {
      expect(t).toBeGreaterThanOrEqual(s.domain[0]);
      expect(t).toBeLessThanOrEqual(s.domain[1]);
    }
    const sorted = [...s.ticks].sort((a, b) => a - b);
    expect(s.ticks).toEqual(sorted);
  });

  it("formats ticks deterministically", () => {
    const s = linearScale([0, 300], [0, 1]);
    expect(s.ticks.map(s.format)).toContain("100");
  });
});

describe("logScale", () => {
  it("snaps the domain outward to decades and ticks every decade", () => {
    const s = logScale([2e-9, 5e-7], [0, 600]);
    expect(s.domain).toEqual([1e-9, 1e-6]);
    expect(s.ticks).toEqual([1e-9, 1e-8, 1e-7, 1e-6]);
    expect(s.map(1e-9)).toBeCloseTo(0, 9);
    expect(s.map(1e-6)).toBeCloseTo(600, 9);
    expect(s.map(Math.pow(10, -7.5))).toBeCloseTo(300, 9);
  });

  it("labels small decades in e-notation and near-unit ones plainly", () => {
    const s = logScale([1e-9, 100], [0, 1]);
    expect(s.format(1e-9)).toBe("1e-9");
    expect(s.format(100)).toBe("100");
  });

  it("rejects nonpositive domains", () => {
    expect(() => logScale([0, 1], [0, 1])).toThrow(/positive domain/);
    expect(() => logScale([-1, 1], [0, 1])).toThrow(/positive domain/);
  });
});

describe("svg primitives", () => {
  it("px renders two fixed decimals and never minus zero", () => {
    expect(px(3)).toBe("3.00");
    expect(px(1.005)).toBe("1.00");
    expect(px(-0.0001)).toBe("0.00");
  });

  it("esc covers the xml metacharacters", () => {
    expect(esc("a<b&c>d")).toBe("a&lt;b&amp;c&gt;d");
  });

  it("pathFrom breaks the stroke at non-finite points", () => {
    const d = pathFrom([0, 1, NaN, 3, 4], [0, 1, 2, 3, 4]);
    expect(d).toBe("M0.00,0.00 L1.00,1.00 M3.00,3.00 L4.00,4.00");
  });
});
