// Browser entry point: connect to the service, pick a dataset, mount.
// The service URL comes from ?service=... (default local cmx serve).

import { CmxClient } from "./api";
import { mountExplorer } from "./app";
import { ExplorerState } from "./state";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? "http://127.0.0.1:8789";
  const client = new CmxClient(base);

  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  const datasets = await client.listDatasets();
  if (datasets.length === 0) {
    root.textContent =
      "No datasets on the service yet. Ingest one with: " +
      "cmx ingest --schema schema.json --records log.ndjson --out DATA/datasets/NAME";
    return;
  }
  const wanted = params.get("dataset");
  const dataset = datasets.find((d) => d.id === wanted) ?? datasets[0];
  const schema = await client.getSchema(dataset.id);

  const state = new ExplorerState(client, dataset, {
    classes: [schema.dimensions[0].name],
  });
  mountExplorer(root, state, schema);
  await state.refresh();
}

void boot();
