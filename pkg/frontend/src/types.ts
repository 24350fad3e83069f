// Wire formats of the query service. Field names and shapes are bit-stable;
// the UI never derives confusion numbers itself, it only renders these.

export type Normalization = "total" | "rows" | "columns";
export type Encoding = "color" | "size";
export type ConditionRole = "actual" | "predicted" | "both";

export interface ConditionDoc {
  dimension: string;
  role: ConditionRole;
  class: string;
}

export interface SpecDoc {
  classes: string[];
  normalization?: Normalization;
  encoding?: Encoding;
  scale_exclude_diagonal?: boolean;
  measures?: string[];
  collapsed?: string[];
  filter?: string;
  where?: ConditionDoc[];
  prune_empty?: boolean;
}

export interface CellDoc {
  row: number;
  col: number;
  count: number;
  value: number;
}

export interface MetricColumnDoc {
  kind: string;
  aggregate: number | null;
  per_class: (number | null)[];
}

export interface AxisNodeDoc {
  name: string;
  leaf: boolean;
  collapsed: boolean;
  children: AxisNodeDoc[];
}

export interface AxisTreeDoc {
  dimension: string;
  tree: AxisNodeDoc | null;
}

export interface ViewDoc {
  row_keys: [string, string][][];
  cells: CellDoc[];
  metric_columns: MetricColumnDoc[];
  axis_tree: AxisTreeDoc[];
  normalization: Normalization;
  encoding: Encoding;
  total_count: number;
}

export interface QueryResponse {
  spec: SpecDoc;
  view: ViewDoc;
}

export interface DatasetHandle {
  id: string;
  name: string;
  n: number;
  schema_digest: string;
}

export interface DimensionDoc {
  name: string;
  classes: string[];
  hierarchy?: string[];
}

export interface SchemaDoc {
  dimensions: DimensionDoc[];
}

export interface ServiceError {
  code: string;
  message: string;
  violations: string[];
}

export type QueryResult =
  | { ok: true; text: string; response: QueryResponse }
  | { ok: false; status: number; error: ServiceError };

/** Minimal service surface the explorer needs; implemented over fetch in
 * api.ts and over golden fixtures in the tests. */
export interface ServiceClient {
  listDatasets(): Promise<DatasetHandle[]>;
  getSchema(datasetId: string): Promise<SchemaDoc>;
  query(datasetId: string, specText: string): Promise<QueryResult>;
  putSpec(specId: string, specText: string): Promise<void>;
  getSpec(specId: string): Promise<string>;
}
