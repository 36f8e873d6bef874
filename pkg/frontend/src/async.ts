/**
 * Bookkeeping for in-flight work.
 *
 * Views kick off fetches without awaiting them, so something has to know
 * when the screen has settled.  Every async fill goes through track(); the
 * test suite (and anything else that needs a stable DOM) awaits whenIdle().
 */

const pending = new Set<Promise<void>>();

export function track<T>(work: Promise<T>): Promise<T> {
  const entry: Promise<void> = work.then(
    () => {
      pending.delete(entry);
    },
    () => {
      pending.delete(entry);
    },
  );
  pending.add(entry);
  return work;
}

/** Resolves once no tracked work remains, including work queued meanwhile. */
export async function whenIdle(): Promise<void> {
  while (pending.size > 0) {
    await Promise.all([...pending]);
    // one macrotask so completions can enqueue follow-up work before we re-check
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
