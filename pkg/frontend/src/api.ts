import {
  ClustersPayload,
  CmcPayload,
  DatasetInfo,
  DendrogramNode,
  QueryPayload,
} from './types';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the retrieval service. Never re-orders results. */
export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async get<T>(path: string, params?: Record<string, string>): Promise<T> {
    const qs = params ? '?' + new URLSearchParams(params).toString() : '';
    const resp = await this.fetchFn(`${this.baseUrl}${path}${qs}`);
    return this.unwrap<T>(resp);
  }

  private async unwrap<T>(resp: Response): Promise<T> {
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        detail = body.error ?? body.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, String(detail));
    }
    return resp.json() as Promise<T>;
  }

  listDatasets(): Promise<DatasetInfo[]> {
    return this.get('/api/datasets');
  }

  listSubjects(dataset: string): Promise<string[]> {
    return this.get(`/api/datasets/${encodeURIComponent(dataset)}/subjects`);
  }

  async query(req: {
    dataset: string;
    type: string;
    metric: string;
    subject_id: string;
    pose: string;
    k: number;
  }): Promise<QueryPayload> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/query`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(req),
    });
    return this.unwrap<QueryPayload>(resp);
  }

  cmc(dataset: string, type: string, metric: string): Promise<CmcPayload> {
    return this.get('/api/cmc', { dataset, type, metric });
  }

  dendrogram(dataset: string, type: string, metric: string): Promise<DendrogramNode> {
    return this.get('/api/dendrogram', { dataset, type, metric });
  }

  clusters(dataset: string, type: string, metric: string, k: number): Promise<ClustersPayload> {
    return this.get('/api/clusters', { dataset, type, metric, k: String(k) });
  }

  meshUrl(dataset: string, subject: string, pose: string): string {
    return (
      `${this.baseUrl}/api/mesh/${encodeURIComponent(subject)}/` +
      `${encodeURIComponent(pose)}?dataset=${encodeURIComponent(dataset)}`
    );
  }

  async meshObj(dataset: string, subject: string, pose: string): Promise<string> {
    const resp = await this.fetchFn(this.meshUrl(dataset, subject, pose));
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return resp.text();
  }
}
