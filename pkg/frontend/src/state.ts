/**
 * Local labeling state for the pending batch.
 *
 * Selections live in Storage keyed by (session, batch) so a reload or a
 * crashed tab never loses work, and reconciliation against a refetched batch
 * keeps every selection whose instance id is still pending.
 */

import type { Batch, LabelEntry } from "./api.js";

export interface BatchState {
  batchId: number;
  instances: { id: number; text: string }[];
  classNames: string[];
  selections: Map<number, number>;
  cursor: number;
}

const storageKey = (sessionId: string, batchId: number) => `alpool:${sessionId}:${batchId}`;

export function loadSelections(storage: Storage, sessionId: string, batchId: number): Map<number, number> {
  const raw = storage.getItem(storageKey(sessionId, batchId));
  if (!raw) return new Map();
  try {
    const entries = JSON.parse(raw) as [number, number][];
    return new Map(entries.map(([id, label]) => [Number(id), Number(label)]));
  } catch {
    return new Map();
  }
}

export function saveSelections(storage: Storage, sessionId: string, state: BatchState): void {
  storage.setItem(storageKey(sessionId, state.batchId), JSON.stringify([...state.selections]));
}

export function clearSelections(storage: Storage, sessionId: string, batchId: number): void {
  storage.removeItem(storageKey(sessionId, batchId));
}

export function batchState(batch: Batch, selections: Map<number, number>): BatchState {
  const pending = new Set(batch.instances.map((inst) => inst.id));
  const kept = new Map([...selections].filter(([id]) => pending.has(id)));
  return {
    batchId: batch.batch_id,
    instances: batch.instances,
    classNames: batch.class_names,
    selections: kept,
    cursor: firstUnlabeled(batch.instances, kept),
  };
}

/** Merge a refetched batch with existing local selections (stale-batch
 * recovery): selections for ids still in the batch survive, the rest drop. */
export function reconcile(state: BatchState, fresh: Batch): BatchState {
  return batchState(fresh, state.selections);
}

function firstUnlabeled(instances: { id: number }[], selections: Map<number, number>): number {
  const index = instances.findIndex((inst) => !selections.has(inst.id));
  return index === -1 ? Math.max(0, instances.length - 1) : index;
}

export function select(state: BatchState, instanceId: number, classIndex: number): BatchState {
  if (classIndex < 0 || classIndex >= state.classNames.length) return state;
  const selections = new Map(state.selections);
  selections.set(instanceId, classIndex);
  return { ...state, selections, cursor: firstUnlabeled(state.instances, selections) };
}

/** Map a pressed key to a class selection for the focused instance:
 * digit "1" selects the first class, "2" the second, and so on. */
export function selectByKey(state: BatchState, key: string): BatchState {
  if (!/^[1-9]$/.test(key)) return state;
  const classIndex = Number(key) - 1;
  const focused = state.instances[state.cursor];
  if (!focused || classIndex >= state.classNames.length) return state;
  return select(state, focused.id, classIndex);
}

export function moveCursor(state: BatchState, delta: number): BatchState {
  const cursor = Math.min(Math.max(state.cursor + delta, 0), state.instances.length - 1);
  return { ...state, cursor };
}

export function labeledCount(state: BatchState): number {
  return state.selections.size;
}

export function isComplete(state: BatchState): boolean {
  return state.instances.every((inst) => state.selections.has(inst.id));
}

/** The submission body; only a complete batch may be submitted. */
export function toLabelEntries(state: BatchState): LabelEntry[] {
  if (!isComplete(state)) {
    throw new Error("batch is not completely labeled");
  }
  return state.instances.map((inst) => ({
    id: inst.id,
    label: state.selections.get(inst.id) as number,
  }));
}
