// Typed client for the engine's /v1 HTTP API. Plain request/response,
// no streaming; every reply is parsed and narrowed before use so the UI
// never renders anything the server did not send.

export type Polarity = 'positive' | 'neutral' | 'negative' | 'none';

export interface EntityInfo {
  domain: string;
  entity_id: string;
  name: string;
}

export interface SnippetRef {
  domain: string;
  entity_id: string;
  review_id: string;
  sent_id: string;
}

export interface GroundedRow {
  text: string;
  ref: SnippetRef;
  polarity: Polarity;
  aspect: string | null;
  entity_name: string;
}

export interface TallyEntry {
  name: string;
  positive: number;
  neutral: number;
  negative: number;
  no_opinion: number;
  total: number;
}

export interface TurnResult {
  session_id: string;
  detected: boolean;
  response: string;
  entities: EntityInfo[];
  grounded: GroundedRow[];
  tally: Record<string, TallyEntry>;
}

export interface HealthReply {
  status: string;
  stages: Record<string, boolean>;
}

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = 'ApiError';
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(url, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
  } catch (err) {
    throw new ApiError(`cannot reach the engine at ${url}: ${String(err)}`);
  }
  if (!resp.ok) {
    let detail = `HTTP ${resp.status}`;
    try {
      const body = (await resp.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(detail, resp.status);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string = '') {}

  health(): Promise<HealthReply> {
    return request<HealthReply>(`${this.baseUrl}/v1/health`);
  }

  listEntities(domain?: string): Promise<EntityInfo[]> {
    const query = domain ? `?domain=${encodeURIComponent(domain)}` : '';
    return request<{ entities: EntityInfo[] }>(`${this.baseUrl}/v1/entities${query}`)
      .then((doc) => doc.entities);
  }

  async createSession(domain?: string): Promise<string> {
    const doc = await request<{ session_id: string }>(`${this.baseUrl}/v1/sessions`, {
      method: 'POST',
      body: JSON.stringify(domain ? { domain } : {}),
    });
    return doc.session_id;
  }

  sendUtterance(sessionId: string, text: string): Promise<TurnResult> {
    return request<TurnResult>(
      `${this.baseUrl}/v1/sessions/${encodeURIComponent(sessionId)}/utterance`,
      { method: 'POST', body: JSON.stringify({ text }) },
    );
  }
}
