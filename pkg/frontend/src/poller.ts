/**
 * Job polling loop: one in-flight request, fixed 1 s cadence, exponential
 * backoff on network failure, and a monotone progress guard so a stale
 * response can never walk the bar backwards.
 */

import { getJob, ApiError } from './api';
import type { JobSnapshot } from './types';

export const POLL_INTERVAL_MS = 1000;
export const MAX_BACKOFF_MS = 15000;

export interface PollerEvents {
  onUpdate: (snapshot: JobSnapshot) => void;
  /** Terminal service answer: the job id is unknown. */
  onMissing: () => void;
  /** Transient network trouble; polling continues with backoff. */
  onRetry?: (attempt: number, delayMs: number) => void;
}

export class JobPoller {
  private readonly jobId: string;
  private readonly events: PollerEvents;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;
  private failures = 0;
  private maxProgress = 0;

  constructor(jobId: string, events: PollerEvents) {
    this.jobId = jobId;
    this.events = events;
  }

  start(): void {
    this.stopped = false;
    void this.tick();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  /** Progress as reported, clamped to never decrease across polls. */
  guardProgress(reported: number): number {
    this.maxProgress = Math.max(this.maxProgress, Math.min(1, reported));
    return this.maxProgress;
  }

  private schedule(delayMs: number): void {
    if (this.stopped) return;
    this.timer = setTimeout(() => void this.tick(), delayMs);
  }

  private async tick(): Promise<void> {
    if (this.stopped) return;
    let snapshot: JobSnapshot;
    try {
      snapshot = await getJob(this.jobId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.stop();
        this.events.onMissing();
        return;
      }
      this.failures += 1;
      const delay = Math.min(POLL_INTERVAL_MS * 2 ** this.failures, MAX_BACKOFF_MS);
      this.events.onRetry?.(this.failures, delay);
      this.schedule(delay);
      return;
    }
    this.failures = 0;
    snapshot.progress = this.guardProgress(snapshot.progress);
    this.events.onUpdate(snapshot);
    if (snapshot.state === 'done' || snapshot.state === 'failed') {
      this.stop();
      return;
    }
    this.schedule(POLL_INTERVAL_MS);
  }
}
