/** Debounced, latest-wins request scheduling for the envelope endpoint.
 *
 * Invariants enforced here:
 *  - at most one request is in flight at any time;
 *  - a response is discarded if a newer request was issued after it
 *    (the UI never shows stale data);
 *  - slider input is debounced, and drag requests drop to a coarse
 *    resolution while release requests use the fine one.
 */

import type { EnvelopeRequest } from "./types.js";

export interface SchedulerOptions<P> {
  send: (request: EnvelopeRequest) => Promise<P>;
  onResult: (payload: P, request: EnvelopeRequest) => void;
  onError: (error: unknown, request: EnvelopeRequest) => void;
  debounceMs?: number;
  dragResolution?: number;
  fineResolution?: number;
  setTimer?: (fn: () => void, ms: number) => unknown;
  clearTimer?: (handle: unknown) => void;
}

export interface RequestParams {
  montage: EnvelopeRequest["montage"];
  plane: EnvelopeRequest["plane"];
}

export class EnvelopeScheduler<P> {
  private readonly options: Required<SchedulerOptions<P>>;
  private timerHandle: unknown = null;
  private wanted: EnvelopeRequest | null = null;
  private inFlightSeq = 0; // 0 = nothing in flight
  private issuedSeq = 0;
  private flights = 0;
  maxObservedInFlight = 0;

  constructor(options: SchedulerOptions<P>) {
    this.options = {
      debounceMs: 150,
      dragResolution: 64,
      fineResolution: 129,
      setTimer: (fn, ms) => setTimeout(fn, ms),
      clearTimer: (handle) => clearTimeout(handle as number),
      ...options,
    };
  }

  /** Request an update; `dragging` selects the coarse resolution. */
  request(params: RequestParams, dragging: boolean): void {
    const resolution = dragging
      ? this.options.dragResolution
      : this.options.fineResolution;
    this.wanted = { ...params, resolution };
    if (this.timerHandle !== null) {
      this.options.clearTimer(this.timerHandle);
    }
    this.timerHandle = this.options.setTimer(() => {
      this.timerHandle = null;
      this.flush();
    }, this.options.debounceMs);
  }

  /** Fire immediately (initial load, plane toggle). */
  requestNow(params: RequestParams): void {
    this.wanted = { ...params, resolution: this.options.fineResolution };
    if (this.timerHandle !== null) {
      this.options.clearTimer(this.timerHandle);
      this.timerHandle = null;
    }
    this.flush();
  }

  get inFlight(): boolean {
    return this.inFlightSeq !== 0;
  }

  private flush(): void {
    if (this.wanted === null || this.inFlight) {
      return; // the in-flight completion handler re-flushes
    }
    const request = this.wanted;
    this.wanted = null;
    const seq = ++this.issuedSeq;
    this.inFlightSeq = seq;
    this.flights += 1;
    this.maxObservedInFlight = Math.max(this.maxObservedInFlight, this.flights);
    this.options.send(request).then(
      (payload) => this.settle(seq, request, payload, null),
      (error) => this.settle(seq, request, null, error),
    );
  }

  private settle(
    seq: number,
    request: EnvelopeRequest,
    payload: P | null,
    error: unknown,
  ): void {
    this.flights -= 1;
    if (this.inFlightSeq === seq) {
      this.inFlightSeq = 0;
    }
    // stale or superseded: a newer request is wanted or was issued
    const stale = seq !== this.issuedSeq || this.wanted !== null;
    if (!stale) {
      if (error !== null) {
        this.options.onError(error, request);
      } else {
        this.options.onResult(payload as P, request);
      }
    } else if (error !== null && this.wanted === null) {
      this.options.onError(error, request);
    }
    if (this.wanted !== null && !this.inFlight) {
      this.flush();
    }
  }
}
