// DOM components, createElement-based. Each takes data and returns an
// element; no component fetches anything itself.

import type { EntityInfo, GroundedRow } from './api.js';
import type { TallyBar, TurnView } from './model.js';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function userBubble(text: string, pending = false): HTMLElement {
  const row = el('div', `bubble-row user${pending ? ' pending' : ''}`);
  row.appendChild(el('div', 'bubble user-bubble', text));
  return row;
}

export function systemBubble(text: string): HTMLElement {
  const row = el('div', 'bubble-row system');
  row.appendChild(el('div', 'bubble system-bubble', text));
  return row;
}

export function noLookupHint(): HTMLElement {
  return el('div', 'no-lookup-hint', 'no review lookup for this turn');
}

export function proportionBar(bar: TallyBar): HTMLElement {
  const wrap = el('div', 'tally');
  const label = el('div', 'tally-label');
  label.appendChild(el('span', 'tally-entity', bar.entityName));
  label.appendChild(el('span', 'tally-caption', bar.caption));
  wrap.appendChild(label);
  const track = el('div', 'tally-bar');
  track.setAttribute('role', 'img');
  track.setAttribute('aria-label', `opinion proportions for ${bar.entityName}`);
  for (const segment of bar.segments) {
    const piece = el('div', `tally-segment ${segment.polarity}`);
    piece.style.flexGrow = String(segment.count);
    piece.title = `${segment.count} ${segment.polarity} (${segment.percent}%)`;
    piece.dataset.polarity = segment.polarity;
    piece.dataset.count = String(segment.count);
    piece.dataset.percent = String(segment.percent);
    track.appendChild(piece);
  }
  wrap.appendChild(track);
  return wrap;
}

export function snippetPopover(row: GroundedRow): HTMLElement {
  const pop = el('div', 'snippet-popover');
  pop.appendChild(el('div', 'popover-line', `entity: ${row.entity_name}`));
  pop.appendChild(el('div', 'popover-line', `review ${row.ref.review_id}, sentence ${row.ref.sent_id}`));
  pop.appendChild(el('div', 'popover-line', `aspect: ${row.aspect ?? 'none'}`));
  return pop;
}

export function snippetRow(row: GroundedRow): HTMLElement {
  const item = el('li', `snippet-row ${row.polarity}`);
  item.appendChild(el('span', `polarity-badge ${row.polarity}`, row.polarity));
  item.appendChild(el('span', 'snippet-text', row.text));
  item.appendChild(el('span', 'snippet-entity', row.entity_name));
  let pop: HTMLElement | null = null;
  item.addEventListener('click', () => {
    if (pop) {
      pop.remove();
      pop = null;
    } else {
      pop = snippetPopover(row);
      item.appendChild(pop);
    }
  });
  return item;
}

export function evidencePanel(view: TurnView): HTMLElement {
  const details = el('details', 'evidence');
  details.setAttribute('open', '');
  const summary = el('summary', 'evidence-summary',
    `evidence: ${view.grounding.length} snippet${view.grounding.length === 1 ? '' : 's'}`);
  details.appendChild(summary);
  for (const bar of view.bars) {
    details.appendChild(proportionBar(bar));
  }
  const list = el('ul', 'snippet-list');
  for (const row of view.grounding) {
    list.appendChild(snippetRow(row));
  }
  details.appendChild(list);
  return details;
}

export function turnBlock(view: TurnView): HTMLElement {
  const block = el('div', 'turn');
  block.appendChild(userBubble(view.user));
  block.appendChild(systemBubble(view.system));
  if (view.detected && view.grounding.length > 0) {
    block.appendChild(evidencePanel(view));
  } else {
    block.appendChild(noLookupHint());
  }
  return block;
}

export function failureRow(text: string, onResend: () => void): HTMLElement {
  const row = el('div', 'bubble-row failure');
  row.appendChild(el('div', 'bubble failure-bubble', `failed to send: ${text}`));
  const resend = el('button', 'resend-button', 'resend');
  resend.addEventListener('click', onResend);
  row.appendChild(resend);
  return row;
}

export function blockingBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = el('div', 'banner');
  banner.appendChild(el('span', 'banner-text', message));
  const retry = el('button', 'retry-button', 'retry');
  retry.addEventListener('click', onRetry);
  banner.appendChild(retry);
  return banner;
}

export function entityPicker(entities: EntityInfo[]): HTMLSelectElement {
  const select = el('select', 'entity-picker');
  const any = el('option', undefined, 'browse entities...');
  any.value = '';
  select.appendChild(any);
  for (const entity of entities) {
    const option = el('option', undefined, `${entity.name} (${entity.domain})`);
    option.value = `${entity.domain}/${entity.entity_id}`;
    select.appendChild(option);
  }
  return select;
}
