/** Fixed-precision coordinate text so identical inputs give identical bytes. */
export function px(v: number): string {
  let s = v.toFixed(2);
  if (s === "-0.00") s = "0.00";
  return s;
}

export function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** One SVG element; attribute order follows the object literal. */
export function el(
  tag: string,
  attrs: Record<string, string | number>,
  body?: string
): string {
  let out = `<${tag}`;
  for (const [k, v] of Object.entries(attrs)) {
    out += ` ${k}="${typeof v === "number" ? px(v) : v}"`;
  }
  if (body === undefined) return out + "/>";
  return `${out}>${body}</${tag}>`;
}

export function text(
  x: number,
  y: number,
  content: string,
  attrs: Record<string, string | number> = {}
): string {
  return el("text", { x, y, ...attrs }, esc(content));
}

/**
 * Polyline path from parallel coordinate arrays. Non-finite points break the
 * stroke instead of being bridged, so gaps in the data stay visible.
 */
export function pathFrom(xs: ArrayLike<number>, ys: ArrayLike<number>): string {
  const parts: string[] = [];
  let pen = false;
  for (let i = 0; i < xs.length; i++) {
    if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) {
      pen = false;
      continue;
    }
    parts.push(`${pen ? "L" : "M"}${px(xs[i])},${px(ys[i])}`);
    pen = true;
  }
  return parts.join(" ");
}
