export { CsvError, parseCsv, readTable, column, requireColumns } from "./csv.js";
export type { Table } from "./csv.js";
export { extent, padded, linearScale, logScale } from "./scale.js";
export type { Scale } from "./scale.js";
export { render, isFigureId, FIGURE_INPUTS } from "./figures.js";
export type { FigureId, FigureSpec, RenderOptions } from "./figures.js";
export { runCli } from "./render.js";
