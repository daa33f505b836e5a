// View-model layer: everything rendered is a pure function of the
// server payload. No client-side inference happens here; the one piece
// of arithmetic is turning tally counts into proportion-bar segments.

import type { GroundedRow, Polarity, TurnResult } from './api.js';

export interface TallyBar {
  entityKey: string;
  entityName: string;
  /** Opinionated segments only (positive/neutral/negative), zero counts dropped. */
  segments: BarSegment[];
  /** e.g. "3 of 4 positive" for the leading polarity. */
  caption: string;
  opinionated: number;
}

export interface BarSegment {
  polarity: Polarity;
  count: number;
  /** Integer percents that always sum to exactly 100. */
  percent: number;
}

export interface TurnView {
  user: string;
  system: string;
  detected: boolean;
  grounding: GroundedRow[];
  bars: TallyBar[];
}

/** Largest-remainder rounding: integer percents summing to exactly 100. */
export function integerPercents(counts: number[]): number[] {
  const total = counts.reduce((a, b) => a + b, 0);
  if (total === 0) return counts.map(() => 0);
  const exact = counts.map((c) => (c * 100) / total);
  const floors = exact.map(Math.floor);
  let remainder = 100 - floors.reduce((a, b) => a + b, 0);
  const order = exact
    .map((value, i) => ({ i, frac: value - floors[i] }))
    .sort((a, b) => b.frac - a.frac || a.i - b.i);
  for (const { i } of order) {
    if (remainder <= 0) break;
    floors[i] += 1;
    remainder -= 1;
  }
  return floors;
}

const POLARITY_ORDER: Polarity[] = ['positive', 'neutral', 'negative'];

function tallyBar(entityKey: string, entry: TurnResult['tally'][string]): TallyBar {
  const counts = [entry.positive, entry.neutral, entry.negative];
  const percents = integerPercents(counts);
  const segments: BarSegment[] = [];
  POLARITY_ORDER.forEach((polarity, i) => {
    if (counts[i] > 0) {
      segments.push({ polarity, count: counts[i], percent: percents[i] });
    }
  });
  const opinionated = counts[0] + counts[1] + counts[2];
  let caption: string;
  if (opinionated === 0) {
    caption = 'no clear opinions';
  } else {
    const lead = segments.reduce((a, b) => (b.count > a.count ? b : a), segments[0]);
    caption = `${lead.count} of ${opinionated} ${lead.polarity}`;
  }
  return { entityKey, entityName: entry.name, segments, caption, opinionated };
}

export function buildTurnView(userText: string, result: TurnResult): TurnView {
  const bars = Object.keys(result.tally)
    .sort()
    .map((key) => tallyBar(key, result.tally[key]));
  return {
    user: userText,
    system: result.response,
    detected: result.detected,
    grounding: result.grounded,
    bars,
  };
}

/**
 * TurnView invariant: per entity and polarity, the tally counts equal the
 * number of grounding rows. Returns a list of violations (empty = ok).
 */
export function tallyViolations(view: TurnView): string[] {
  const problems: string[] = [];
  const byEntity = new Map<string, Map<Polarity, number>>();
  for (const row of view.grounding) {
    const key = `${row.ref.domain}/${row.ref.entity_id}`;
    const per = byEntity.get(key) ?? new Map<Polarity, number>();
    per.set(row.polarity, (per.get(row.polarity) ?? 0) + 1);
    byEntity.set(key, per);
  }
  for (const bar of view.bars) {
    const per = byEntity.get(bar.entityKey) ?? new Map<Polarity, number>();
    for (const segment of bar.segments) {
      const observed = per.get(segment.polarity) ?? 0;
      if (observed !== segment.count) {
        problems.push(
          `${bar.entityKey}: tally says ${segment.count} ${segment.polarity}, ` +
          `grounding has ${observed}`,
        );
      }
    }
  }
  return problems;
}

export function percentSum(bar: TallyBar): number {
  return bar.segments.reduce((a, s) => a + s.percent, 0);
}
