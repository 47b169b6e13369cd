import { describe, expect, it } from "vitest";

import { EnvelopeScheduler } from "../src/scheduler.js";
import type { EnvelopeRequest } from "../src/types.js";

/** Manual timers and a manually resolved transport, so the test controls
 * every asynchronous step. */
function harness() {
  const timers: Array<{ fn: () => void; ms: number; cleared: boolean }> = [];
  const sent: Array<{
    request: EnvelopeRequest;
    resolve: (v: string) => void;
    reject: (e: unknown) => void;
  }> = [];
  const results: Array<{ payload: string; request: EnvelopeRequest }> = [];
  const errors: unknown[] = [];

  const scheduler = new EnvelopeScheduler<string>({
    send: (request) =>
      new Promise<string>((resolve, reject) => {
        sent.push({ request, resolve, reject });
      }),
    onResult: (payload, request) => results.push({ payload, request }),
    onError: (error) => errors.push(error),
    setTimer: (fn, ms) => {
      timers.push({ fn, ms, cleared: false });
      return timers.length - 1;
    },
    clearTimer: (handle) => {
      timers[handle as number].cleared = true;
    },
  });

  const fireTimers = () => {
    for (const timer of timers.splice(0)) {
      if (!timer.cleared) timer.fn();
    }
  };
  const settle = () => new Promise<void>((resolve) => setTimeout(resolve, 0));
  return { scheduler, timers, sent, results, errors, fireTimers, settle };
}

const montage = { phi: 70, alpha: 20, psi: 0, i_left: 1, i_right: 1 };

describe("EnvelopeScheduler", () => {
  it("debounces slider input into a single request", async () => {
    const h = harness();
    for (let k = 0; k < 10; k += 1) {
      h.scheduler.request({ montage: { ...montage, phi: 60 + k }, plane: "xy" }, true);
    }
    expect(h.sent.length).toBe(0); // nothing until the debounce fires
    h.fireTimers();
    expect(h.sent.length).toBe(1);
    expect(h.sent[0].request.montage.phi).toBe(69); // only the latest value
  });

  it("keeps at most one request in flight while dragging", async () => {
    const h = harness();
    h.scheduler.request({ montage, plane: "xy" }, true);
    h.fireTimers();
    expect(h.sent.length).toBe(1);

    // more drag events while the first request is still in flight
    for (let k = 0; k < 5; k += 1) {
      h.scheduler.request({ montage: { ...montage, alpha: 30 + k }, plane: "xy" }, true);
      h.fireTimers();
    }
    expect(h.sent.length).toBe(1); // queued, not sent
    expect(h.scheduler.maxObservedInFlight).toBe(1);

    h.sent[0].resolve("first");
    await h.settle();
    expect(h.sent.length).toBe(2); // the queued latest goes out afterwards
    expect(h.sent[1].request.montage.alpha).toBe(34);
    h.sent[1].resolve("second");
    await h.settle();
    expect(h.scheduler.maxObservedInFlight).toBe(1);
  });

  it("discards stale responses (latest wins)", async () => {
    const h = harness();
    h.scheduler.request({ montage, plane: "xy" }, false);
    h.fireTimers();
    h.scheduler.request({ montage: { ...montage, phi: 95 }, plane: "xy" }, false);
    h.fireTimers();
    // first response arrives after a newer request was registered
    h.sent[0].resolve("stale");
    await h.settle();
    expect(h.results.length).toBe(0);
    h.sent[1].resolve("fresh");
    await h.settle();
    expect(h.results.map((r) => r.payload)).toEqual(["fresh"]);
  });

  it("uses the drag resolution while dragging and fine on release", () => {
    const h = harness();
    h.scheduler.request({ montage, plane: "xy" }, true);
    h.fireTimers();
    expect(h.sent[0].request.resolution).toBe(64);
    h.sent[0].resolve("a");
    h.scheduler.request({ montage, plane: "xy" }, false);
    h.fireTimers();
  });

  it("reports errors for the latest request only", async () => {
    const h = harness();
    h.scheduler.requestNow({ montage, plane: "xz" });
    expect(h.sent.length).toBe(1);
    h.sent[0].reject(new Error("boom"));
    await h.settle();
    expect(h.errors.length).toBe(1);
    expect(h.results.length).toBe(0);
  });
});
