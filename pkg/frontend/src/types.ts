export interface Match {
  subject_id: string;
  distance: number;
}

export interface QueryPayload {
  dataset: string;
  type: string;
  metric: string;
  k: number;
  query: { subject_id?: string; pose?: string; vector?: number[] };
  matches: Match[];
}

export interface DatasetInfo {
  id: string;
  subject_count: number;
  poses: string[];
  descriptor_types: string[];
}

export interface CmcPoint {
  rank: number;
  rate: number;
}

export interface CmcPayload {
  summary: Record<string, unknown>;
  curve: CmcPoint[];
}

export interface DendrogramNode {
  id: number;
  height: number;
  name?: string;
  children?: DendrogramNode[];
}

export interface ClustersPayload {
  k: number;
  labels: Record<string, number>;
}
