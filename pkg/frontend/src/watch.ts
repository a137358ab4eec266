// Long-polls the app version endpoint and reports increases. Network
// trouble backs off exponentially, capped at 30 s.

import type { Api } from "./api";

const POLL_TIMEOUT_MS = 25000;
const MAX_BACKOFF_MS = 30000;

export interface WatchHandle {
  stop(): void;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export function watchVersion(
  api: Api,
  appId: string,
  versionSeen: number,
  onNewVersion: (version: number) => void | Promise<void>,
  pollTimeoutMs: number = POLL_TIMEOUT_MS,
): WatchHandle {
  let running = true;
  let since = versionSeen;
  let backoff = 1000;

  (async () => {
    while (running) {
      try {
        const version = await api.pollVersion(appId, since, pollTimeoutMs);
        backoff = 1000;
        if (!running) return;
        if (version > since) {
          since = version;
          await onNewVersion(version);
        }
      } catch {
        await sleep(backoff);
        backoff = Math.min(backoff * 2, MAX_BACKOFF_MS);
      }
    }
  })();

  return {
    stop() {
      running = false;
    },
  };
}
