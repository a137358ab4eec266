import { afterEach, describe, expect, it, vi } from "vitest";

import type { Api } from "../src/api";
import { watchVersion } from "../src/watch";

function tick(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

function fakeApi(poll: (since: number) => Promise<number>): Api {
  return { pollVersion: (_app: string, since: number) => poll(since) } as unknown as Api;
}

const never = new Promise<number>(() => {});

afterEach(() => {
  vi.useRealTimers();
});

describe("watchVersion", () => {
  it("reports a version increase once and carries on from it", async () => {
    const seen: number[] = [];
    const polled: number[] = [];
    const api = fakeApi((since) => {
      polled.push(since);
      if (polled.length === 1) return Promise.resolve(1);
      if (polled.length === 2) return Promise.resolve(2);
      return never;
    });
    const handle = watchVersion(api, "app", 1, (v) => {
      seen.push(v);
    });
    await tick();
    await tick();
    expect(seen).toEqual([2]);
    expect(polled.slice(0, 3)).toEqual([1, 1, 2]);
    handle.stop();
  });

  it("stays quiet while the version is unchanged", async () => {
    const seen: number[] = [];
    let calls = 0;
    const api = fakeApi(() => {
      calls += 1;
      return calls <= 3 ? Promise.resolve(1) : never;
    });
    const handle = watchVersion(api, "app", 1, (v) => {
      seen.push(v);
    });
    await tick();
    await tick();
    await tick();
    expect(seen).toEqual([]);
    handle.stop();
  });

  it("stops when told to", async () => {
    let resolveNext: (v: number) => void = () => {};
    const api = fakeApi(
      () => new Promise<number>((resolve) => (resolveNext = resolve)),
    );
    const seen: number[] = [];
    const handle = watchVersion(api, "app", 1, (v) => {
      seen.push(v);
    });
    await tick();
    handle.stop();
    resolveNext(5);
    await tick();
    expect(seen).toEqual([]);
  });

  it("backs off exponentially on failures, capped at 30s", async () => {
    vi.useFakeTimers();
    let calls = 0;
    const api = fakeApi(() => {
      calls += 1;
      return Promise.reject(new Error("down"));
    });
    const handle = watchVersion(api, "app", 1, () => {});
    await vi.advanceTimersByTimeAsync(0);
    expect(calls).toBe(1);

    await vi.advanceTimersByTimeAsync(999);
    expect(calls).toBe(1);
    await vi.advanceTimersByTimeAsync(1);
    expect(calls).toBe(2);

    await vi.advanceTimersByTimeAsync(2000);
    expect(calls).toBe(3);
    await vi.advanceTimersByTimeAsync(4000);
    expect(calls).toBe(4);
    await vi.advanceTimersByTimeAsync(8000);
    expect(calls).toBe(5);
    await vi.advanceTimersByTimeAsync(16000);
    expect(calls).toBe(6);

    // From here every retry waits the 30s cap.
    await vi.advanceTimersByTimeAsync(30000);
    expect(calls).toBe(7);
    await vi.advanceTimersByTimeAsync(30000);
    expect(calls).toBe(8);
    handle.stop();
  });

  it("resets the backoff after a successful poll", async () => {
    vi.useFakeTimers();
    let calls = 0;
    const api = fakeApi(() => {
      calls += 1;
      if (calls <= 2) return Promise.reject(new Error("down"));
      if (calls === 3) return Promise.resolve(1);
      return Promise.reject(new Error("down again"));
    });
    const handle = watchVersion(api, "app", 1, () => {});
    await vi.advanceTimersByTimeAsync(0);
    await vi.advanceTimersByTimeAsync(1000);
    await vi.advanceTimersByTimeAsync(2000);
    expect(calls).toBe(4);
    // The failure after the success waits 1s again, not 4s.
    await vi.advanceTimersByTimeAsync(1000);
    expect(calls).toBe(5);
    handle.stop();
  });
});
