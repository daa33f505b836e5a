// Single-page app wiring: health gate, session start, send loop.
// One in-flight turn per session; the send button stays disabled while
// a reply is pending.

import { ApiClient } from './api.js';
import { buildTurnView, tallyViolations } from './model.js';
import {
  blockingBanner,
  entityPicker,
  failureRow,
  turnBlock,
  userBubble,
} from './components.js';

interface AppState {
  client: ApiClient;
  sessionId: string | null;
  inFlight: boolean;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function startSession(state: AppState, domain: string | undefined): Promise<void> {
  state.sessionId = await state.client.createSession(domain);
  byId('transcript').replaceChildren();
  byId('composer').classList.remove('hidden');
  const label = domain ? `${domain} session` : 'session';
  byId('session-label').textContent = `${label} ${state.sessionId.slice(0, 8)}`;
}

async function sendCurrent(state: AppState): Promise<void> {
  const input = byId('utterance') as HTMLInputElement;
  const text = input.value.trim();
  if (!text || state.inFlight || !state.sessionId) return;
  const transcript = byId('transcript');
  const send = byId('send') as HTMLButtonElement;

  state.inFlight = true;
  send.disabled = true;
  input.value = '';
  const pending = userBubble(text, true);
  transcript.appendChild(pending);
  transcript.scrollTop = transcript.scrollHeight;

  try {
    const result = await state.client.sendUtterance(state.sessionId, text);
    const view = buildTurnView(text, result);
    const violations = tallyViolations(view);
    if (violations.length > 0) {
      console.warn('tally/grounding mismatch from server:', violations);
    }
    pending.replaceWith(turnBlock(view));
  } catch (err) {
    pending.replaceWith(failureRow(text, () => {
      input.value = text;
      void sendCurrent(state);
    }));
    console.error(err);
  } finally {
    state.inFlight = false;
    send.disabled = false;
    transcript.scrollTop = transcript.scrollHeight;
    input.focus();
  }
}

async function boot(): Promise<void> {
  const state: AppState = { client: new ApiClient(''), sessionId: null, inFlight: false };
  const root = byId('app');

  try {
    await state.client.health();
  } catch (err) {
    const banner = blockingBanner(
      `engine unreachable: ${err instanceof Error ? err.message : String(err)}`,
      () => {
        banner.remove();
        void boot();
      },
    );
    root.prepend(banner);
    return;
  }

  const entities = await state.client.listEntities();
  const picker = entityPicker(entities);
  byId('picker-slot').replaceChildren(picker);

  const domainSelect = byId('domain') as HTMLSelectElement;
  picker.addEventListener('change', () => {
    const key = picker.value;
    if (key) domainSelect.value = key.split('/')[0];
  });

  byId('start').addEventListener('click', () => {
    void startSession(state, domainSelect.value || undefined).catch((err) => {
      root.prepend(blockingBanner(String(err), () => window.location.reload()));
    });
  });

  byId('send').addEventListener('click', () => void sendCurrent(state));
  (byId('utterance') as HTMLInputElement).addEventListener('keydown', (event) => {
    if (event.key === 'Enter') void sendCurrent(state);
  });
}

document.addEventListener('DOMContentLoaded', () => void boot());
