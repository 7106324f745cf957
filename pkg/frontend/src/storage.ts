/** Durable pending labels so a reload never loses keyboard work. */

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

function pendingKey(sessionId: string): string {
  return `readlevel.pending.${sessionId}`;
}

export function loadPending(
  store: KeyValueStore,
  sessionId: string,
): Record<string, number> {
  const raw = store.getItem(pendingKey(sessionId));
  if (raw === null) {
    return {};
  }
  try {
    const parsed = JSON.parse(raw) as unknown;
    if (parsed === null || typeof parsed !== "object" || Array.isArray(parsed)) {
      return {};
    }
    const result: Record<string, number> = {};
    for (const [id, level] of Object.entries(parsed)) {
      if (Number.isInteger(level) && (level as number) >= 1 && (level as number) <= 5) {
        result[id] = level as number;
      }
    }
    return result;
  } catch {
    return {};
  }
}

export function savePending(
  store: KeyValueStore,
  sessionId: string,
  pending: Readonly<Record<string, number>>,
): void {
  store.setItem(pendingKey(sessionId), JSON.stringify(pending));
}

export function clearPending(store: KeyValueStore, sessionId: string): void {
  store.removeItem(pendingKey(sessionId));
}

/** In-memory stand-in used by tests and non-browser callers. */
export class MemoryStore implements KeyValueStore {
  private readonly items = new Map<string, string>();

  getItem(key: string): string | null {
    return this.items.get(key) ?? null;
  }

  setItem(key: string, value: string): void {
    this.items.set(key, value);
  }

  removeItem(key: string): void {
    this.items.delete(key);
  }
}
