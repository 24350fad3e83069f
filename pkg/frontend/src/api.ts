// fetch-backed client for the query service.

import type {
  DatasetHandle,
  QueryResult,
  SchemaDoc,
  ServiceClient,
  ServiceError,
} from "./types";

export class CmxClient implements ServiceClient {
  constructor(private readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  async listDatasets(): Promise<DatasetHandle[]> {
    const resp = await fetch(this.url("/datasets"));
    if (!resp.ok) throw new Error(`GET /datasets failed: ${resp.status}`);
    return (await resp.json()) as DatasetHandle[];
  }

  async getSchema(datasetId: string): Promise<SchemaDoc> {
    const resp = await fetch(this.url(`/datasets/${datasetId}/schema`));
    if (!resp.ok) throw new Error(`GET schema failed: ${resp.status}`);
    return (await resp.json()) as SchemaDoc;
  }

  async query(datasetId: string, specText: string): Promise<QueryResult> {
    const resp = await fetch(this.url(`/datasets/${datasetId}/query`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: specText,
    });
    const text = await resp.text();
    if (!resp.ok) {
      return { ok: false, status: resp.status, error: JSON.parse(text) as ServiceError };
    }
    return { ok: true, text, response: JSON.parse(text) };
  }

  async putSpec(specId: string, specText: string): Promise<void> {
    const resp = await fetch(this.url(`/specs/${specId}`), {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: specText,
    });
    if (!resp.ok) throw new Error(`PUT /specs/${specId} failed: ${resp.status}`);
  }

  async getSpec(specId: string): Promise<string> {
    const resp = await fetch(this.url(`/specs/${specId}`));
    if (!resp.ok) throw new Error(`GET /specs/${specId} failed: ${resp.status}`);
    return resp.text();
  }
}
