import { ApiError, GatewayClient } from './api';
import {
  renderChatPanels,
  renderPromptOutcomes,
  showQueuePosition,
} from './chat';
import { layoutTopology, type Point } from './layout';
import { ViewState } from './state';
import { renderTimelines } from './timelines';
import { renderTopology } from './topology';
import './style.css';

const AUTO_STEP_MS = 4000;

const client = new GatewayClient();
const state = new ViewState();
let positions: Map<number, Point> | null = null;
let autoStepTimer: number | null = null;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function setStatus(text: string, isError = false): void {
  const bar = el('status');
  bar.textContent = text;
  bar.classList.toggle('status-error', isError);
}

function redraw(): void {
  const latest = state.latest();
  if (!latest || !state.topology || !positions) return;
  renderTopology(
    el('topology'),
    state.topology,
    latest,
    positions,
    state.placementMoves(),
  );
  renderPromptOutcomes(el('outcomes'), latest);
  const series = new Map(
    state.users.map((u) => [u.id, state.seriesFor(u.id)]),
  );
  renderTimelines(el('timelines'), series);
  setStatus(
    `session ${state.sessionId} — step ${latest.step} (${latest.status})`,
  );
}

async function submitPrompt(userId: number, text: string): Promise<void> {
  if (!state.sessionId) return;
  try {
    const { position } = await client.submitPrompt(state.sessionId, userId, text);
    showQueuePosition(el('chat'), userId, position);
  } catch (err) {
    setStatus(describe(err), true);
  }
}

async function runStep(): Promise<void> {
  if (!state.sessionId) return;
  try {
    const result = await client.step(state.sessionId);
    state.applyResult(result);
    redraw();
  } catch (err) {
    if (err instanceof ApiError && err.code === 'conflict') {
      setStatus('a step is already running', true);
      return;
    }
    setStatus(describe(err), true);
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

function toggleAutoStep(enabled: boolean): void {
  if (enabled && autoStepTimer === null) {
    autoStepTimer = window.setInterval(runStep, AUTO_STEP_MS);
  } else if (!enabled && autoStepTimer !== null) {
    window.clearInterval(autoStepTimer);
    autoStepTimer = null;
  }
}

interface BootOptions {
  fixture: string;
  users: unknown[];
  mode: 'arbitrated' | 'paper-replay';
}

const DEFAULT_BOOT: BootOptions = {
  fixture: 'internet2-like',
  users: [
    {
      id: 1,
      router: 3,
      traffic_gbps: 0.5,
      initial_cpu_cores: 2.0,
      initial_latency_bound_ms: 3.0,
    },
  ],
  mode: 'arbitrated',
};

export async function boot(options: BootOptions = DEFAULT_BOOT): Promise<void> {
  setStatus('connecting…');
  try {
    const created = await client.createSession({
      fixture: options.fixture,
      users: options.users,
      config: { mode: options.mode, extractor: 'keyword' },
    });
    state.sessionId = created.session_id;
    state.applyResult(created.standing);
    const [topology, sessionState] = await Promise.all([
      client.topology(created.session_id),
      client.state(created.session_id),
    ]);
    state.topology = topology;
    state.applyState(sessionState);
    positions = layoutTopology(topology);
  } catch (err) {
    setStatus(describe(err), true);
    return;
  }

  renderChatPanels(el('chat'), state.users, (userId, text) => {
    void submitPrompt(userId, text);
  });
  el('step-button').addEventListener('click', () => void runStep());
  const auto = el('auto-step') as HTMLInputElement;
  auto.addEventListener('change', () => toggleAutoStep(auto.checked));
  redraw();
}

if (!import.meta.env.VITEST) {
  void boot();
}
