import type { AnnotationRecord, ProgressInfo, QueueResponse } from './types.js';

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export interface ApiClient {
  queueNext(annotator: string): Promise<QueueResponse>;
  submitLabel(record: AnnotationRecord): Promise<AnnotationRecord>;
  progress(): Promise<ProgressInfo>;
}

// Thin fetch wrapper around the three routes; throws ApiError with the
// HTTP status on any non-2xx response so callers can branch on 404.
export class HttpApiClient implements ApiClient {
  constructor(
    private readonly base: string = '',
    private readonly fetchImpl: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (error) {
      throw new ApiError(`network failure: ${String(error)}`, 0);
    }
    if (!response.ok) {
      throw new ApiError(`${path} failed: HTTP ${response.status}`, response.status);
    }
    return (await response.json()) as T;
  }

  queueNext(annotator: string): Promise<QueueResponse> {
    const query = new URLSearchParams({ annotator });
    return this.request<QueueResponse>(`/api/queue/next?${query.toString()}`);
  }

  submitLabel(record: AnnotationRecord): Promise<AnnotationRecord> {
    return this.request<AnnotationRecord>('/api/labels', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(record),
    });
  }

  progress(): Promise<ProgressInfo> {
    return this.request<ProgressInfo>('/api/progress');
  }
}
