// SVG renderer for the confusion matrix view. Pure presentation: every
// number shown comes from the view document; the renderer never recomputes
// counts or normalized values.
//
// Encoding rules: color mode fills cells from the sequential ramp; size mode
// scales an inner square. Zero-count cells are excluded from the encoding
// scale and drawn as a small light-gray dash. With scale_exclude_diagonal
// the diagonal leaves the scale entirely and is hidden, giving the full
// color range to the confusions.

import { colorFor } from "./ramp";
import type {
  AxisNodeDoc,
  Encoding,
  ViewDoc,
} from "./types";

const CELL = 26;
const CHAR_W = 7.2;
const INDICATOR_W = 7;
const METRIC_W = 78;
const DASH_COLOR = "#c9c9c9";
const HIGHLIGHT = "#f6d8a0"; // light amber

export interface MatrixCallbacks {
  onToggleCollapse?: (dimension: string, path: string[]) => void;
  onDrillDown?: (dimension: string, path: string[]) => void;
  onHover?: (row: number | null, col: number | null) => void;
}

export interface RenderOptions {
  encoding: Encoding;
  scaleExcludeDiagonal?: boolean;
  callbacks?: MatrixCallbacks;
}

export function countAt(view: ViewDoc, row: number, col: number): number {
  for (const cell of view.cells) {
    if (cell.row === row && cell.col === col) return cell.count;
  }
  return 0;
}

export function keyLabel(view: ViewDoc, index: number): string {
  return view.row_keys[index].map(([, cls]) => cls).join("/");
}

/** Natural-language description of one cell's confusion count. */
export function hoverCaption(view: ViewDoc, row: number, col: number): string {
  const count = countAt(view, row, col);
  const noun = count === 1 ? "instance" : "instances";
  return `${count} ${noun} of ${keyLabel(view, row)} predicted as ${keyLabel(view, col)}`;
}

/** Root-to-node path for a named node in an axis tree, or null. */
export function pathToNode(tree: AxisNodeDoc, name: string): string[] | null {
  if (tree.name === name) return [tree.name];
  for (const child of tree.children) {
    const sub = pathToNode(child, name);
    if (sub !== null) return [tree.name, ...sub];
  }
  return null;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS("http://www.w3.org/2000/svg", tag);
  for (const [k, v] of Object.entries(attrs)) {
    el.setAttribute(k, String(v));
  }
  return el;
}

/** Ancestor chains (excluding the visible item itself) per visible key, for
 * the hierarchy indicator bars next to the axis. */
function ancestorChains(view: ViewDoc): string[][] {
  const trees = new Map(
    view.axis_tree.filter((a) => a.tree !== null).map((a) => [a.dimension, a.tree!]),
  );
  return view.row_keys.map((parts) => {
    const chain: string[] = [];
    for (const [dimension, cls] of parts) {
      const tree = trees.get(dimension);
      if (!tree) continue;
      const path = pathToNode(tree, cls);
      if (path) chain.push(...path.slice(0, -1));
    }
    return chain;
  });
}

export function renderMatrix(
  container: HTMLElement,
  view: ViewDoc,
  opts: RenderOptions,
): void {
  container.textContent = "";
  const k = view.row_keys.length;
  const labels = view.row_keys.map((_, i) => keyLabel(view, i));
  const chains = ancestorChains(view);
  const depth = Math.max(0, ...chains.map((c) => c.length));
  const labelW = Math.max(60, ...labels.map((s) => s.length * CHAR_W)) + 18;
  const left = depth * INDICATOR_W + labelW;
  const top = Math.max(40, ...labels.map((s) => s.length * CHAR_W * 0.75)) + 10;
  const gridW = k * CELL;
  const gridH = k * CELL;
  const metricsW = view.metric_columns.length * METRIC_W;
  const width = left + gridW + 12 + metricsW;
  const height = top + gridH + 8;

  const svg = svgEl("svg", {
    width,
    height,
    class: "cmx-matrix",
    "data-encoding": opts.encoding,
  });

  // scale over visible nonzero cells; optionally ignore the diagonal
  let max = 0;
  for (const cell of view.cells) {
    if (opts.scaleExcludeDiagonal && cell.row === cell.col) continue;
    max = Math.max(max, cell.value);
  }
  svg.setAttribute("data-scale-max", String(max));

  // row/column highlight bands (invisible until hover)
  const bands: { row: SVGRectElement[]; col: SVGRectElement[] } = { row: [], col: [] };
  for (let i = 0; i < k; i++) {
    const rowBand = svgEl("rect", {
      x: 0,
      y: top + i * CELL,
      width: left + gridW,
      height: CELL,
      fill: "none",
      class: "band row-band",
      "data-row": i,
    });
    const colBand = svgEl("rect", {
      x: left + i * CELL,
      y: 0,
      width: CELL,
      height: top + gridH,
      fill: "none",
      class: "band col-band",
      "data-col": i,
    });
    bands.row.push(rowBand);
    bands.col.push(colBand);
    svg.appendChild(rowBand);
    svg.appendChild(colBand);
  }

  const indicatorsByNode = new Map<string, SVGRectElement[]>();
  const trees = new Map(
    view.axis_tree.filter((a) => a.tree !== null).map((a) => [a.dimension, a.tree!]),
  );

  // axis labels + hierarchy indicators + drill-down affordances
  for (let i = 0; i < k; i++) {
    const y = top + i * CELL;
    chains[i].forEach((node, level) => {
      const bar = svgEl("rect", {
        x: level * INDICATOR_W,
        y,
        width: INDICATOR_W - 2,
        height: CELL,
        fill: "#d4d4d4",
        class: "indicator",
        "data-node": node,
      });
      const dimension = view.row_keys[i].find(([dim, cls]) => {
        const tree = trees.get(dim);
        return tree !== null && tree !== undefined && pathToNode(tree, node) !== null;
      })?.[0];
      bar.addEventListener("click", () => {
        if (!dimension) return;
        const path = pathToNode(trees.get(dimension)!, node);
        if (path) opts.callbacks?.onToggleCollapse?.(dimension, path);
      });
      if (!indicatorsByNode.has(node)) indicatorsByNode.set(node, []);
      indicatorsByNode.get(node)!.push(bar);
      svg.appendChild(bar);
    });

    const rowLabel = svgEl("text", {
      x: left - 14,
      y: y + CELL * 0.68,
      "text-anchor": "end",
      class: "axis-label row-label",
      "data-row": i,
      "font-size": 12,
    });
    rowLabel.textContent = labels[i];
    attachNodeInteractions(rowLabel, view, i, trees, opts);
    svg.appendChild(rowLabel);

    const drill = svgEl("text", {
      x: left - 4,
      y: y + CELL * 0.68,
      "text-anchor": "end",
      class: "drill",
      "data-row": i,
      "font-size": 10,
    });
    drill.textContent = "⌕"; // magnifying glass
    drill.addEventListener("click", () => {
      const target = drillTarget(view, i, trees);
      if (target) opts.callbacks?.onDrillDown?.(target.dimension, target.path);
    });
    svg.appendChild(drill);

    const colLabel = svgEl("text", {
      x: left + i * CELL + CELL / 2,
      y: top - 6,
      "text-anchor": "start",
      transform: `rotate(-55 ${left + i * CELL + CELL / 2} ${top - 6})`,
      class: "axis-label col-label",
      "data-col": i,
      "font-size": 12,
    });
    colLabel.textContent = labels[i];
    attachNodeInteractions(colLabel, view, i, trees, opts);
    svg.appendChild(colLabel);
  }

  const caption = document.createElement("div");
  caption.className = "cmx-caption";

  const setHover = (row: number | null, col: number | null) => {
    for (const band of bands.row) band.setAttribute("fill", "none");
    for (const band of bands.col) band.setAttribute("fill", "none");
    for (const bars of indicatorsByNode.values()) {
      for (const bar of bars) bar.setAttribute("fill", "#d4d4d4");
    }
    if (row !== null && col !== null) {
      bands.row[row].setAttribute("fill", HIGHLIGHT);
      bands.col[col].setAttribute("fill", HIGHLIGHT);
      for (const node of [...chains[row], ...chains[col]]) {
        for (const bar of indicatorsByNode.get(node) ?? []) {
          bar.setAttribute("fill", "#000000");
        }
      }
      caption.textContent = hoverCaption(view, row, col);
    } else {
      caption.textContent = "";
    }
    opts.callbacks?.onHover?.(row, col);
  };

  // cells: sparse nonzero entries drawn per encoding, all other positions a dash
  const nonzero = new Map<string, { count: number; value: number }>();
  for (const cell of view.cells) {
    nonzero.set(`${cell.row},${cell.col}`, { count: cell.count, value: cell.value });
  }
  for (let i = 0; i < k; i++) {
    for (let j = 0; j < k; j++) {
      const x = left + j * CELL;
      const y = top + i * CELL;
      const hit = svgEl("rect", {
        x,
        y,
        width: CELL,
        height: CELL,
        fill: "transparent",
        class: "cell-hit",
        "data-row": i,
        "data-col": j,
      });
      const entry = nonzero.get(`${i},${j}`);
      const hidden = opts.scaleExcludeDiagonal && i === j;
      if (entry && !hidden) {
        if (opts.encoding === "color") {
          const rect = svgEl("rect", {
            x: x + 1,
            y: y + 1,
            width: CELL - 2,
            height: CELL - 2,
            fill: colorFor(entry.value, max),
            class: "cell",
            "data-row": i,
            "data-col": j,
            "data-count": entry.count,
            "data-value": entry.value,
          });
          svg.appendChild(rect);
        } else {
          const frame = svgEl("rect", {
            x: x + 1,
            y: y + 1,
            width: CELL - 2,
            height: CELL - 2,
            fill: "none",
            stroke: "#e3e3e3",
            class: "cell-frame",
          });
          const side = max > 0 ? Math.sqrt(entry.value / max) * (CELL - 4) : 0;
          const inner = svgEl("rect", {
            x: x + CELL / 2 - side / 2,
            y: y + CELL / 2 - side / 2,
            width: side,
            height: side,
            fill: "#3a528b",
            class: "cell",
            "data-row": i,
            "data-col": j,
            "data-count": entry.count,
            "data-value": entry.value,
          });
          svg.appendChild(frame);
          svg.appendChild(inner);
        }
      } else if (!entry) {
        const dash = svgEl("line", {
          x1: x + CELL / 2 - 4,
          y1: y + CELL / 2,
          x2: x + CELL / 2 + 4,
          y2: y + CELL / 2,
          stroke: DASH_COLOR,
          "stroke-width": 1.5,
          fill: "none",
          class: "zero-dash",
          "data-row": i,
          "data-col": j,
        });
        svg.appendChild(dash);
      }
      hit.addEventListener("mouseenter", () => setHover(i, j));
      hit.addEventListener("mouseleave", () => setHover(null, null));
      svg.appendChild(hit);
    }
  }

  // metric columns: aggregate on top, one value per row underneath
  view.metric_columns.forEach((column, c) => {
    const x = left + gridW + 12 + c * METRIC_W;
    const header = svgEl("text", {
      x,
      y: top - 26,
      class: "metric-header",
      "font-size": 12,
      "font-weight": "bold",
    });
    header.textContent = column.kind;
    svg.appendChild(header);
    const aggregate = svgEl("text", {
      x,
      y: top - 10,
      class: "metric-aggregate",
      "data-kind": column.kind,
      "font-size": 12,
    });
    aggregate.textContent = formatMetric(column.aggregate);
    svg.appendChild(aggregate);
    column.per_class.forEach((value, i) => {
      const text = svgEl("text", {
        x,
        y: top + i * CELL + CELL * 0.68,
        class: "metric-value",
        "data-kind": column.kind,
        "data-row": i,
        "font-size": 12,
      });
      text.textContent = formatMetric(value);
      svg.appendChild(text);
    });
  });

  container.appendChild(svg);
  container.appendChild(caption);
}

export function formatMetric(value: number | null): string {
  if (value === null) return "-";
  if (Number.isInteger(value)) return String(value);
  return value.toFixed(4);
}

function attachNodeInteractions(
  label: SVGTextElement,
  view: ViewDoc,
  index: number,
  trees: Map<string, AxisNodeDoc>,
  opts: RenderOptions,
): void {
  label.addEventListener("click", () => {
    // clicking a visible class toggles its subtree when it is a hierarchy
    // node (i.e. currently collapsed -> expand it)
    for (const [dimension, cls] of view.row_keys[index]) {
      const tree = trees.get(dimension);
      if (!tree) continue;
      const path = pathToNode(tree, cls);
      if (path) {
        const node = nodeAt(tree, path);
        if (node && !node.leaf) {
          opts.callbacks?.onToggleCollapse?.(dimension, path);
          return;
        }
      }
    }
  });
}

function nodeAt(tree: AxisNodeDoc, path: string[]): AxisNodeDoc | null {
  let node: AxisNodeDoc | null = tree;
  for (const name of path.slice(1)) {
    node = node?.children.find((c) => c.name === name) ?? null;
  }
  return node;
}

function drillTarget(
  view: ViewDoc,
  index: number,
  trees: Map<string, AxisNodeDoc>,
): { dimension: string; path: string[] } | null {
  for (const [dimension, cls] of view.row_keys[index]) {
    const tree = trees.get(dimension);
    if (!tree) continue;
    const path = pathToNode(tree, cls);
    if (path) return { dimension, path };
  }
  return null;
}
