import type {
  CreateSessionResponse,
  InterpretResponse,
  StateDoc,
  StepResultDoc,
  TopologyDoc,
} from './types';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

interface SessionConfigDoc {
  mode?: 'arbitrated' | 'paper-replay';
  extractor?: 'keyword' | 'svm' | 'llm';
  weights?: [number, number, number];
  rates?: [number, number];
}

export interface CreateSessionBody {
  fixture?: string;
  topology?: unknown;
  users: unknown[];
  config?: SessionConfigDoc;
}

/** Thin typed wrapper over the gateway endpoints. */
export class GatewayClient {
  constructor(private readonly base: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    if (!resp.ok) {
      let code = 'internal';
      let message = `HTTP ${resp.status}`;
      try {
        const body = await resp.json();
        if (typeof body.code === 'string') code = body.code;
        if (typeof body.message === 'string') message = body.message;
      } catch {
        // non-JSON error body; keep the defaults
      }
      throw new ApiError(resp.status, code, message);
    }
    return resp.json() as Promise<T>;
  }

  createSession(body: CreateSessionBody): Promise<CreateSessionResponse> {
    return this.request('/api/sessions', {
      method: 'POST',
      body: JSON.stringify(body),
    });
  }

  submitPrompt(
    sessionId: string,
    userId: number,
    text: string,
  ): Promise<{ position: number }> {
    return this.request(`/api/sessions/${sessionId}/prompts`, {
      method: 'POST',
      body: JSON.stringify({ user_id: userId, text }),
    });
  }

  step(sessionId: string): Promise<StepResultDoc> {
    return this.request(`/api/sessions/${sessionId}/step`, { method: 'POST' });
  }

  state(sessionId: string): Promise<StateDoc> {
    return this.request(`/api/sessions/${sessionId}/state`);
  }

  topology(sessionId: string): Promise<TopologyDoc> {
    return this.request(`/api/sessions/${sessionId}/topology`);
  }

  interpret(text: string, extractor = 'keyword'): Promise<InterpretResponse> {
    return this.request('/api/interpret', {
      method: 'POST',
      body: JSON.stringify({ text, extractor }),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request('/health');
  }
}
