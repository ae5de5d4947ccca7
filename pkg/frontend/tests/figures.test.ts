import { describe, expect, it } from "vitest";
import * as crypto from "node:crypto";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { FIGURE_INPUTS, FigureId, render } from "../src/figures.js";
import { runCli } from "../src/render.js";

const GOLDEN = fileURLToPath(new URL("./fixtures/golden", import.meta.url));
const FIG4_EXACT = fileURLToPath(new URL("./fixtures/fig4-exact", import.meta.url));
const ALL: FigureId[] = ["fig2", "fig3a", "fig3bc", "fig3d", "fig4"];

const AXIS_LABEL: Record<FigureId, string> = {
  fig2: "backscatter intensity (dB)",
  fig3a: "StDv of differential phase (rad)",
  fig3bc: "time (ms)",
  fig3d: "frequency (Hz)",
  fig4: "pk-pk differential phase (rad)",
};

function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "report-"));
}

/** Data circles carry a clip-path; legend swatches do not. */
function dataCircles(svg: string): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  const re = /<circle cx="(-?\d+\.\d+)" cy="(-?\d+\.\d+)" r="3\.00"[^>]*clip-path/g;
  for (const m of svg.matchAll(re)) out.push([Number(m[1]), Number(m[2])]);
  return out;
}

function theoryVertices(svg: string): Array<[number, number]> {
  const m = svg.match(/<path d="([^"]+)" stroke="#888888"[^>]*clip-path/);
  expect(m).not.toBeNull();
  const out: Array<[number, number]> = [];
  for (const v of m![1].matchAll(/[ML](-?\d+\.\d+),(-?\d+\.\d+)/g)) {
    out.push([Number(v[1]), Number(v[2])]);
  }
  return out;
}

describe("rendering the golden outputs", () => {
  for (const id of ALL) {
    it(`${id} renders without error`, () => {
      const svg = render({ figure: id, inputDir: GOLDEN });
      expect(svg.startsWith("<svg ")).toBe(true);
      expect(svg.endsWith("</svg>\n")).toBe(true);
      expect(svg).toContain(AXIS_LABEL[id]);
    });
  }

  it("re-rendering identical inputs is byte-stable", () => {
    const out = tmpdir();
    for (const id of ALL) {
      const a = path.join(out, `${id}-a.svg`);
      const b = path.join(out, `${id}-b.svg`);
      const svgA = render({ figure: id, inputDir: GOLDEN, output: a });
      const svgB = render({ figure: id, inputDir: GOLDEN, output: b });
      expect(svgA).toBe(svgB);
      expect(fs.readFileSync(a).equals(fs.readFileSync(b))).toBe(true);
    }
    fs.rmSync(out, { recursive: true });
  });

  it("rendering never mutates its inputs", () => {
    const digest = () => {
      const h = crypto.createHash("sha256");
      for (const f of fs.readdirSync(GOLDEN).sort()) {
        h.update(f).update(fs.readFileSync(path.join(GOLDEN, f)));
      }
      return h.digest("hex");
    };
    const before = digest();
    for (const id of ALL) render({ figure: id, inputDir: GOLDEN });
    expect(digest()).toBe(before);
  });

  it("fig3d crops to --fmax and the crop changes the picture", () => {
    const full = render({ figure: "fig3d", inputDir: GOLDEN });
    const crop = render({ figure: "fig3d", inputDir: GOLDEN, options: { fmaxHz: 600 } });
    expect(crop).not.toBe(full);
    expect(render({ figure: "fig3d", inputDir: GOLDEN, options: { fmaxHz: 600 } })).toBe(crop);
  });

  it("accepts per-file path overrides", () => {
    const dir = tmpdir();
    const alt = path.join(dir, "renamed.csv");
    fs.copyFileSync(path.join(GOLDEN, "intensity.csv"), alt);
    const svg = render({
      figure: "fig2",
      inputDir: dir, // intensity.csv does not exist here
      files: { "intensity.csv": alt },
    });
    expect(svg).toContain("backscatter intensity (dB)");
    fs.rmSync(dir, { recursive: true });
  });
});

describe("fig4 against the theory overlay", () => {
  it("measured-equals-theory points land on the overlay line", () => {
    const svg = render({ figure: "fig4", inputDir: FIG4_EXACT });
    const circles = dataCircles(svg);
    const verts = theoryVertices(svg);
    expect(circles.length).toBe(9);
    expect(verts.length).toBe(9);
    for (const [cx, cy] of circles) {
      const [vx, vy] = verts.reduce((best, v) =>
        Math.abs(v[0] - cx) < Math.abs(best[0] - cx) ? v : best
      );
      // same data, same scales, same 0.01 px quantisation
      expect(Math.abs(cx - vx)).toBeLessThanOrEqual(0.011);
      expect(Math.abs(cy - vy)).toBeLessThanOrEqual(0.011);
    }
  });

  it("marks below-detection points as open circles", () => {
    const dir = tmpdir();
    fs.writeFileSync(
      path.join(dir, "sensitivity.csv"),
      "dl_pp_m,measured_rad_pp,theory_rad_pp,below_detection\n" +
        "1e-09,0.01,0.009,1\n1e-08,0.09,0.09,0\n"
    );
    const svg = render({ figure: "fig4", inputDir: dir });
    expect(svg).toMatch(/<circle[^>]*fill="#ffffff" stroke="#1f77b4"[^>]*clip-path/);
    expect(svg).toContain("below detection");
    fs.rmSync(dir, { recursive: true });
  });
});

describe("input validation", () => {
  it("a missing column is reported with file and column name", () => {
    const dir = tmpdir();
    const lines = fs
      .readFileSync(path.join(GOLDEN, "intensity.csv"), "utf8")
      .trim()
      .split("\n")
      .map((l) => l.split(",").slice(0, 2).join(","));
    fs.writeFileSync(path.join(dir, "intensity.csv"), lines.join("\n") + "\n");
    expect(() => render({ figure: "fig2", inputDir: dir })).toThrow(
      /intensity\.csv: missing required column "intensity_db"/
    );
    fs.rmSync(dir, { recursive: true });
  });

  it("a missing input file is reported by name", () => {
    const dir = tmpdir();
    fs.copyFileSync(path.join(GOLDEN, "profile.csv"), path.join(dir, "profile.csv"));
    expect(() => render({ figure: "fig3a", inputDir: dir })).toThrow(/profile_static\.csv/);
    fs.rmSync(dir, { recursive: true });
  });

  it("a corrupt cell is reported with its position", () => {
    const dir = tmpdir();
    fs.writeFileSync(
      path.join(dir, "intensity.csv"),
      "tap,z_m,intensity_db\n1,0.83,-72.9\n2,oops,-70.0\n"
    );
    expect(() => render({ figure: "fig2", inputDir: dir })).toThrow(
      /non-numeric cell "oops" in column "z_m" at data row 1/
    );
    fs.rmSync(dir, { recursive: true });
  });

  it("unknown figure ids are rejected", () => {
    expect(() => render({ figure: "fig9" as FigureId, inputDir: GOLDEN })).toThrow(
      /unknown figure "fig9"/
    );
  });

  it("every declared input really is read", () => {
    // guards the FIGURE_INPUTS table against drifting from the builders
    for (const id of ALL) {
      for (const name of FIGURE_INPUTS[id]) {
        const dir = tmpdir();
        for (const n of FIGURE_INPUTS[id]) {
          if (n !== name) fs.copyFileSync(path.join(GOLDEN, n), path.join(dir, n));
        }
        expect(() => render({ figure: id, inputDir: dir })).toThrow(new RegExp(name.replace(".", "\\.")));
        fs.rmSync(dir, { recursive: true });
      }
    }
  });
});

describe("command line", () => {
  it("renders and reports the output path", () => {
    const dir = tmpdir();
    const out = path.join(dir, "fig2.svg");
    expect(runCli(["--figure", "fig2", "--in", GOLDEN, "--out", out])).toBe(0);
    expect(fs.readFileSync(out, "utf8").startsWith("<svg ")).toBe(true);
    fs.rmSync(dir, { recursive: true });
  });

  it("usage problems exit 2, data problems exit 1", () => {
    expect(runCli(["--figure", "fig2"])).toBe(2);
    expect(runCli(["--figure", "nope", "--in", GOLDEN, "--out", "/tmp/x.svg"])).toBe(2);
    expect(runCli(["--figure", "fig3d", "--in", GOLDEN, "--out", "/tmp/x.svg", "--fmax", "-5"])).toBe(2);
    expect(runCli(["--bogus-flag"])).toBe(2);
    expect(runCli(["--figure", "fig2", "--in", "/nonexistent", "--out", "/tmp/x.svg"])).toBe(1);
  });

  it("--help exits 0", () => {
    expect(runCli(["--help"])).toBe(0);
  });
});
