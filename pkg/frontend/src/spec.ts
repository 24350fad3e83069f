// Spec document helpers: canonical text plus the pure edits behind every
// interaction. Canonical form matches the service byte for byte (fixed key
// order, defaults omitted, compact separators), so the editor text, the
// share payload, and stored specs are interchangeable.

import type { ConditionDoc, ConditionRole, SpecDoc } from "./types";

export function canonicalSpecText(spec: SpecDoc): string {
  const out: Record<string, unknown> = { classes: spec.classes };
  if (spec.normalization && spec.normalization !== "total") {
    out.normalization = spec.normalization;
  }
  if (spec.encoding && spec.encoding !== "color") {
    out.encoding = spec.encoding;
  }
  if (spec.scale_exclude_diagonal) {
    out.scale_exclude_diagonal = true;
  }
  if (spec.measures && spec.measures.length > 0) {
    out.measures = spec.measures;
  }
  if (spec.collapsed && spec.collapsed.length > 0) {
    out.collapsed = spec.collapsed;
  }
  if (spec.filter !== undefined && spec.filter !== null) {
    out.filter = spec.filter;
  }
  if (spec.where && spec.where.length > 0) {
    out.where = spec.where.map((c) => ({
      dimension: c.dimension,
      role: c.role,
      class: c.class,
    }));
  }
  if (spec.prune_empty) {
    out.prune_empty = true;
  }
  return JSON.stringify(out);
}

export function nodeRef(dimension: string, path: string[]): string {
  return `${dimension}:${path.join("/")}`;
}

/** Add the node to collapsed if absent, remove it if present. */
export function toggleCollapsed(spec: SpecDoc, ref: string): SpecDoc {
  const collapsed = spec.collapsed ?? [];
  const next = collapsed.includes(ref)
    ? collapsed.filter((c) => c !== ref)
    : [...collapsed, ref];
  return { ...spec, collapsed: next };
}

export function setFilter(spec: SpecDoc, ref: string | null): SpecDoc {
  const next = { ...spec };
  if (ref === null) {
    delete next.filter;
  } else {
    next.filter = ref;
  }
  return next;
}

export class ShelfError extends Error {}

export function activateDimension(spec: SpecDoc, dimension: string): SpecDoc {
  if (spec.classes.includes(dimension)) return spec;
  // a conditioned label cannot be nested; drop its conditions on activation
  const where = (spec.where ?? []).filter((c) => c.dimension !== dimension);
  return { ...spec, classes: [...spec.classes, dimension], where };
}

export function deactivateDimension(spec: SpecDoc, dimension: string): SpecDoc {
  if (!spec.classes.includes(dimension)) return spec;
  if (spec.classes.length === 1) {
    throw new ShelfError("at least one label must stay activated");
  }
  return { ...spec, classes: spec.classes.filter((d) => d !== dimension) };
}

export function reorderClasses(spec: SpecDoc, order: string[]): SpecDoc {
  const current = [...spec.classes].sort();
  const wanted = [...order].sort();
  if (JSON.stringify(current) !== JSON.stringify(wanted)) {
    throw new ShelfError("reorder must permute the activated labels");
  }
  return { ...spec, classes: [...order] };
}

/** Condition on a label's class; the label leaves the nesting (shelf grays it). */
export function setCondition(
  spec: SpecDoc,
  dimension: string,
  role: ConditionRole,
  cls: string,
): SpecDoc {
  let classes = spec.classes;
  if (classes.includes(dimension)) {
    if (classes.length === 1) {
      throw new ShelfError(
        "cannot condition the only activated label; activate another first",
      );
    }
    classes = classes.filter((d) => d !== dimension);
  }
  const where: ConditionDoc[] = [
    ...(spec.where ?? []).filter((c) => c.dimension !== dimension),
    { dimension, role, class: cls },
  ];
  return { ...spec, classes, where };
}

export function clearCondition(spec: SpecDoc, dimension: string): SpecDoc {
  return {
    ...spec,
    where: (spec.where ?? []).filter((c) => c.dimension !== dimension),
  };
}
