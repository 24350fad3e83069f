// Explorer state: the spec document is the single source of truth. Every
// interaction is a pure spec edit followed by a re-query; every editor edit
// that the service accepts becomes the new spec. The last good view stays on
// screen through invalid edits, and only the newest in-flight query may
// land (latest wins).

import {
  ShelfError,
  activateDimension,
  canonicalSpecText,
  clearCondition,
  deactivateDimension,
  nodeRef,
  reorderClasses,
  setCondition,
  setFilter,
  toggleCollapsed,
} from "./spec";
import type {
  ConditionRole,
  DatasetHandle,
  QueryResponse,
  ServiceClient,
  SpecDoc,
  ViewDoc,
} from "./types";

export type ShelfAction =
  | { kind: "activate" }
  | { kind: "deactivate" }
  | { kind: "reorder"; order: string[] }
  | { kind: "set_condition"; role: ConditionRole; class: string }
  | { kind: "clear_condition" };

export interface ExplorerOptions {
  /** Editor keystroke debounce; interaction-driven queries are immediate. */
  editorDebounceMs?: number;
}

type Listener = () => void;

export class ExplorerState {
  readonly dataset: DatasetHandle;

  spec: SpecDoc;
  specText: string;
  lastView: ViewDoc | null = null;
  lastResponseText: string | null = null;
  hover: { row: number; col: number } | null = null;
  errors: string[] = [];

  private readonly client: ServiceClient;
  private readonly debounceMs: number;
  private generation = 0;
  private settledGeneration = 0;
  private editorTimer: ReturnType<typeof setTimeout> | null = null;
  private listeners: Listener[] = [];
  private pending: Promise<void> = Promise.resolve();

  constructor(
    client: ServiceClient,
    dataset: DatasetHandle,
    spec: SpecDoc,
    options: ExplorerOptions = {},
  ) {
    this.client = client;
    this.dataset = dataset;
    this.spec = spec;
    this.specText = canonicalSpecText(spec);
    this.debounceMs = options.editorDebounceMs ?? 300;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Canonical spec text — the share payload. */
  shareText(): string {
    return this.specText;
  }

  /** Resolves when every query issued so far has settled. */
  whenIdle(): Promise<void> {
    return this.pending;
  }

  /** Issue a query for the current spec; stale responses are discarded. */
  refresh(): Promise<void> {
    const text = canonicalSpecText(this.spec);
    const generation = ++this.generation;
    const run = this.client.query(this.dataset.id, text).then(
      (result) => {
        if (generation <= this.settledGeneration) return; // superseded
        this.settledGeneration = generation;
        if (result.ok) {
          this.applyResponse(result.response, result.text);
        } else {
          this.errors =
            result.error.violations.length > 0
              ? result.error.violations
              : [result.error.message];
        }
        this.notify();
      },
      (err) => {
        if (generation <= this.settledGeneration) return;
        this.settledGeneration = generation;
        this.errors = [String(err)];
        this.notify();
      },
    );
    this.pending = this.pending.then(() => run);
    return run;
  }

  private applyResponse(response: QueryResponse, text: string): void {
    this.spec = response.spec;
    this.specText = canonicalSpecText(response.spec);
    this.lastView = response.view;
    this.lastResponseText = text;
    this.errors = [];
  }

  private edit(mutate: (spec: SpecDoc) => SpecDoc): Promise<void> {
    try {
      this.spec = mutate(this.spec);
    } catch (err) {
      if (err instanceof ShelfError) {
        this.errors = [err.message];
        this.notify();
        return Promise.resolve();
      }
      throw err;
    }
    this.specText = canonicalSpecText(this.spec);
    this.notify();
    return this.refresh();
  }

  toggleCollapse(dimension: string, path: string[]): Promise<void> {
    return this.edit((spec) => toggleCollapsed(spec, nodeRef(dimension, path)));
  }

  drillDown(dimension: string, path: string[]): Promise<void> {
    return this.edit((spec) => setFilter(spec, nodeRef(dimension, path)));
  }

  clearFilter(): Promise<void> {
    return this.edit((spec) => setFilter(spec, null));
  }

  shelf(dimension: string, action: ShelfAction): Promise<void> {
    return this.edit((spec) => {
      switch (action.kind) {
        case "activate":
          return activateDimension(spec, dimension);
        case "deactivate":
          return deactivateDimension(spec, dimension);
        case "reorder":
          return reorderClasses(spec, action.order);
        case "set_condition":
          return setCondition(spec, dimension, action.role, action.class);
        case "clear_condition":
          return clearCondition(spec, dimension);
      }
    });
  }

  setHover(row: number | null, col: number | null): void {
    this.hover = row === null || col === null ? null : { row, col };
  }

  /** Editor text changed. Syntax errors surface immediately without a
   * round trip; anything parseable goes to the service, which is the only
   * validator. Invalid specs keep the last good view. */
  editorInput(text: string, immediate = false): Promise<void> {
    if (this.editorTimer !== null) {
      clearTimeout(this.editorTimer);
      this.editorTimer = null;
    }
    const submit = (): Promise<void> => {
      try {
        JSON.parse(text);
      } catch (err) {
        this.errors = [`syntax error: ${(err as Error).message}`];
        this.notify();
        return Promise.resolve();
      }
      const generation = ++this.generation;
      const run = this.client.query(this.dataset.id, text).then((result) => {
        if (generation <= this.settledGeneration) return;
        this.settledGeneration = generation;
        if (result.ok) {
          this.applyResponse(result.response, result.text);
        } else {
          this.errors =
            result.error.violations.length > 0
              ? result.error.violations
              : [result.error.message];
        }
        this.notify();
      });
      this.pending = this.pending.then(() => run);
      return run;
    };
    if (immediate || this.debounceMs === 0) {
      return submit();
    }
    return new Promise((resolve) => {
      this.editorTimer = setTimeout(() => {
        this.editorTimer = null;
        void submit().then(resolve);
      }, this.debounceMs);
    });
  }
}
