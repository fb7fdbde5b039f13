/** Thin client for the render service; every call returns typed data or throws ApiError. */

import type { JobSnapshot, StoryboardDoc, ValidationDetail } from './types';

export const API_BASE = '/api';

export class ApiError extends Error {
  readonly status: number;
  readonly detail: ValidationDetail | null;

  constructor(status: number, message: string, detail: ValidationDetail | null = null) {
    super(message);
    this.status = status;
    this.detail = detail;
  }
}

async function raise(response: Response): Promise<never> {
  let detail: ValidationDetail | null = null;
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (typeof body.detail === 'string') {
      message = body.detail;
    } else if (body.detail && typeof body.detail === 'object') {
      detail = body.detail as ValidationDetail;
      message = detail.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, message, detail);
}

export interface CreateJobRequest {
  config: Record<string, unknown>;
  voiceover?: File | null;
  music?: File | null;
}

/** POST /api/jobs: plain JSON when there are no files, multipart otherwise. */
export async function createJob(req: CreateJobRequest): Promise<string> {
  let response: Response;
  if (req.voiceover || req.music) {
    const form = new FormData();
    form.append('config', JSON.stringify(req.config));
    if (req.voiceover) form.append('voiceover_upload', req.voiceover);
    if (req.music) form.append('music_upload', req.music);
    response = await fetch(`${API_BASE}/jobs`, { method: 'POST', body: form });
  } else {
    response = await fetch(`${API_BASE}/jobs`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(req.config),
    });
  }
  if (!response.ok) await raise(response);
  const body = (await response.json()) as { id: string };
  return body.id;
}

export async function getJob(id: string): Promise<JobSnapshot> {
  const response = await fetch(`${API_BASE}/jobs/${encodeURIComponent(id)}`);
  if (!response.ok) await raise(response);
  return (await response.json()) as JobSnapshot;
}

export async function getStoryboard(id: string): Promise<StoryboardDoc> {
  const response = await fetch(`${API_BASE}/jobs/${encodeURIComponent(id)}/storyboard`);
  if (!response.ok) await raise(response);
  return (await response.json()) as StoryboardDoc;
}

/** Dry-run the server-side parser on pasted storyboard text. */
export async function parseStoryboard(
  text: string,
  prompt: string,
  formatHint: 'plain' | 'json' | 'auto' = 'auto',
): Promise<StoryboardDoc> {
  const response = await fetch(`${API_BASE}/parse`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ text, prompt, format_hint: formatHint }),
  });
  if (!response.ok) await raise(response);
  return (await response.json()) as StoryboardDoc;
}

export function videoUrl(id: string): string {
  return `${API_BASE}/jobs/${encodeURIComponent(id)}/video`;
}

/** Frame preview endpoint is 1-based. */
export function frameUrl(id: string, frameNumber: number): string {
  return `${API_BASE}/jobs/${encodeURIComponent(id)}/frames/${frameNumber}`;
}

/**
 * 1-based frame numbers of the five keyframes inside an N-frame timeline:
 * keyframe i sits at index round(i*(N-1)/4).
 */
export function keyframeNumbers(frameCount: number): number[] {
  if (frameCount < 1) return [];
  const numbers: number[] = [];
  for (let i = 0; i < 5; i += 1) {
    numbers.push(Math.round((i * (frameCount - 1)) / 4) + 1);
  }
  return numbers;
}
