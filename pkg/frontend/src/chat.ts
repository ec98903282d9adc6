import type { PromptRecordDoc, StepResultDoc, UserDoc } from './types';

export type SubmitHandler = (userId: number, text: string) => void;

function markerText(p: PromptRecordDoc): string {
  const sign = (v: number) => (v > 0 ? `+${v}` : String(v));
  return `(${sign(p.marker.cpu)}, ${sign(p.marker.latency_bound)})`;
}

/** One compose box per user; submission calls back with (user, text). */
export function renderChatPanels(
  container: HTMLElement,
  users: UserDoc[],
  onSubmit: SubmitHandler,
): void {
  container.textContent = '';
  for (const user of [...users].sort((a, b) => a.id - b.id)) {
    const panel = document.createElement('form');
    panel.className = 'chat-panel';
    panel.dataset.user = String(user.id);

    const heading = document.createElement('h3');
    heading.textContent = `user ${user.id} (router ${user.router})`;
    panel.appendChild(heading);

    const input = document.createElement('input');
    input.type = 'text';
    input.name = 'prompt';
    input.placeholder = 'describe what you need…';
    panel.appendChild(input);

    const button = document.createElement('button');
    button.type = 'submit';
    button.textContent = 'send';
    panel.appendChild(button);

    const status = document.createElement('span');
    status.className = 'queue-status';
    panel.appendChild(status);

    panel.addEventListener('submit', (event) => {
      event.preventDefault();
      const text = input.value.trim();
      if (!text) return;
      onSubmit(user.id, text);
      input.value = '';
    });
    container.appendChild(panel);
  }
}

export function showQueuePosition(
  container: HTMLElement,
  userId: number,
  position: number,
): void {
  const status = container.querySelector<HTMLElement>(
    `.chat-panel[data-user="${userId}"] .queue-status`,
  );
  if (status) status.textContent = `queued at position ${position}`;
}

/**
 * Outcome list for one step: each prompt with its marker, an
 * accepted/rejected badge, and a warning badge when the interpreter
 * was degraded (LLM unavailable).
 */
export function renderPromptOutcomes(
  container: HTMLElement,
  result: StepResultDoc,
): void {
  container.textContent = '';
  const heading = document.createElement('h3');
  heading.textContent = `step ${result.step}`;
  container.appendChild(heading);

  if (result.prompts.length === 0) {
    const empty = document.createElement('p');
    empty.className = 'no-prompts';
    empty.textContent = 'no prompts this step';
    container.appendChild(empty);
    return;
  }

  const list = document.createElement('ul');
  list.className = 'prompt-outcomes';
  for (const p of result.prompts) {
    const item = document.createElement('li');
    item.dataset.user = String(p.user);

    const text = document.createElement('span');
    text.className = 'prompt-text';
    text.textContent = `user ${p.user}: “${p.text}” → ${markerText(p)}`;
    item.appendChild(text);

    const badge = document.createElement('span');
    badge.className = p.accepted ? 'badge badge-accepted' : 'badge badge-rejected';
    badge.textContent = p.accepted ? 'accepted' : 'rejected by arbitration';
    item.appendChild(badge);

    if (p.diagnostics.unavailable) {
      const warn = document.createElement('span');
      warn.className = 'badge badge-degraded';
      warn.textContent = 'interpreter degraded';
      item.appendChild(warn);
    }
    list.appendChild(item);
  }
  container.appendChild(list);
}
