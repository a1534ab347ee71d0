/** Pure vote-selection logic shared by the controller and the views. */

import type { PendingComparison, PendingVotes, VoteItem } from "./types.js";

export function pairKey(newLocation: number, opponent: number): string {
  return `${newLocation}|${opponent}`;
}

export function comparisonKey(comparison: PendingComparison): string {
  return pairKey(comparison.new_location, comparison.opponent);
}

/** One side per comparison must be selected; selections on stale pairs don't count. */
export function isComplete(
  pending: PendingVotes,
  selections: Map<string, number>,
): boolean {
  return pending.comparisons.every((comparison) => {
    const choice = selections.get(comparisonKey(comparison));
    return (
      choice === comparison.new_location || choice === comparison.opponent
    );
  });
}

export function answeredCount(
  pending: PendingVotes,
  selections: Map<string, number>,
): number {
  return pending.comparisons.filter((comparison) => {
    const choice = selections.get(comparisonKey(comparison));
    return choice === comparison.new_location || choice === comparison.opponent;
  }).length;
}

/** Build the submission body; throws if any comparison is unanswered. */
export function votesBody(
  pending: PendingVotes,
  selections: Map<string, number>,
): VoteItem[] {
  if (!isComplete(pending, selections)) {
    throw new Error("all comparisons must be answered before submitting");
  }
  return pending.comparisons.map((comparison) => ({
    new_location: comparison.new_location,
    opponent: comparison.opponent,
    preferred: selections.get(comparisonKey(comparison))!,
  }));
}

export function toggleFlip(flips: Set<number>, logIndex: number): Set<number> {
  const next = new Set(flips);
  if (next.has(logIndex)) {
    next.delete(logIndex);
  } else {
    next.add(logIndex);
  }
  return next;
}
