/** JSON payload shapes delivered by the HTTP service. */

export interface PatentEntry {
  id: string;
  title: string;
  abstract: string;
  percentile: number | null;
}

export interface SampleSection {
  seed: number;
  top_central: PatentEntry[];
  random: PatentEntry[];
}

export interface SearchResult {
  code: string;
  upc_label: string;
  ipc_label: string;
  size: number;
  matched_count: number;
  precision: number;
  recall: number;
  mpr: number;
  k: number | null;
  mean_centrality: number | null;
  scored_patent_count: number;
  sample: SampleSection;
}

export interface SearchResponse {
  schema_version: number;
  query: string;
  tokens: string[];
  matched_patents: number;
  results: SearchResult[];
}

export interface DomainDetail {
  schema_version: number;
  code: string;
  upc_label: string;
  ipc_label: string;
  status: string;
  size: number;
  pre_dedup_size: number;
  expected_overlap: number;
  k: number | null;
  mean_centrality: number | null;
  scored_patent_count: number;
}

export type SampleKind = "top" | "random";

export interface SamplePayload {
  schema_version: number;
  code: string;
  kind: SampleKind;
  seed: number;
  patents: PatentEntry[];
}
