// Explorer assembly: shelf, matrix, metric columns, caption, and the spec
// editor, wired to one ExplorerState. Rendering is a pure function of the
// state; interacting with the matrix rewrites the editor text to the
// canonical spec, and editing the spec re-renders the matrix.

import { renderMatrix } from "./render";
import type { ExplorerState } from "./state";
import type { ConditionRole, SchemaDoc } from "./types";

export interface ExplorerHandles {
  root: HTMLElement;
  editor: HTMLTextAreaElement;
  matrix: HTMLElement;
  shelf: HTMLElement;
  errors: HTMLElement;
  share: HTMLButtonElement;
}

export function mountExplorer(
  root: HTMLElement,
  state: ExplorerState,
  schema: SchemaDoc,
): ExplorerHandles {
  root.textContent = "";
  root.classList.add("cmx-explorer");

  const shelf = document.createElement("div");
  shelf.className = "cmx-shelf";
  const matrix = document.createElement("div");
  matrix.className = "cmx-matrix-host";
  const errors = document.createElement("div");
  errors.className = "cmx-errors";
  const editor = document.createElement("textarea");
  editor.className = "cmx-editor";
  editor.rows = 10;
  const share = document.createElement("button");
  share.className = "cmx-share";
  share.textContent = "share spec";

  root.append(shelf, matrix, errors, editor, share);

  editor.addEventListener("input", () => {
    void state.editorInput(editor.value);
  });
  share.addEventListener("click", () => {
    const text = state.shareText();
    const clip = (navigator as { clipboard?: { writeText(t: string): Promise<void> } })
      .clipboard;
    if (clip) void clip.writeText(text);
    share.dataset.lastShared = text;
  });

  const renderShelf = () => {
    shelf.textContent = "";
    const conditioned = new Map(
      (state.spec.where ?? []).map((c) => [c.dimension, c]),
    );
    for (const dim of schema.dimensions) {
      const chip = document.createElement("div");
      chip.className = "shelf-chip";
      chip.dataset.dimension = dim.name;
      const active = state.spec.classes.includes(dim.name);
      chip.dataset.state = active
        ? "active"
        : conditioned.has(dim.name)
          ? "conditioned"
          : "marginalized";
      const name = document.createElement("span");
      name.textContent = dim.name;
      name.className = "shelf-name";
      name.addEventListener("click", () => {
        void state.shelf(dim.name, {
          kind: active ? "deactivate" : "activate",
        });
      });
      chip.appendChild(name);

      const condition = document.createElement("select");
      condition.className = "shelf-condition";
      const none = document.createElement("option");
      none.value = "";
      none.textContent = conditioned.has(dim.name)
        ? `${conditioned.get(dim.name)!.role}=${conditioned.get(dim.name)!.class}`
        : "condition...";
      condition.appendChild(none);
      for (const role of ["actual", "predicted", "both"] as ConditionRole[]) {
        for (const cls of dim.classes) {
          const option = document.createElement("option");
          option.value = `${role}:${cls}`;
          option.textContent = `${role} = ${cls}`;
          condition.appendChild(option);
        }
      }
      condition.addEventListener("change", () => {
        if (!condition.value) {
          void state.shelf(dim.name, { kind: "clear_condition" });
          return;
        }
        const [role, cls] = condition.value.split(":") as [ConditionRole, string];
        void state.shelf(dim.name, {
          kind: "set_condition",
          role,
          class: cls,
        });
      });
      chip.appendChild(condition);
      shelf.appendChild(chip);
    }
  };

  const render = () => {
    renderShelf();
    errors.textContent = state.errors.join("; ");
    if (document.activeElement !== editor) {
      editor.value = state.specText;
    }
    if (state.lastView) {
      renderMatrix(matrix, state.lastView, {
        encoding: state.spec.encoding ?? state.lastView.encoding,
        scaleExcludeDiagonal: state.spec.scale_exclude_diagonal ?? false,
        callbacks: {
          onToggleCollapse: (dimension, path) => {
            void state.toggleCollapse(dimension, path);
            editor.value = state.specText;
          },
          onDrillDown: (dimension, path) => {
            void state.drillDown(dimension, path);
            editor.value = state.specText;
          },
          onHover: (row, col) => state.setHover(row, col),
        },
      });
    }
  };

  state.subscribe(render);
  render();
  return { root, editor, matrix, shelf, errors, share };
}
