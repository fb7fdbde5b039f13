/**
 * Form-state handling: assembling the job config per mode and the
 * mode-switch rule (prompt survives, advanced-only fields are dropped).
 */

import type { FormState, RenderMode } from './types';
import { draftIsComplete, draftToJson, type StoryboardDraft } from './storyboard';

export const RESOLUTIONS = ['720x480', '768x512', '1024x768'] as const;
export const QUALITIES = ['medium', 'high', 'ultra'] as const;
export const MOODS = ['cinematic', 'epic', 'suspense'] as const;

export const DEFAULT_FORM: FormState = {
  mode: 'simple',
  prompt: '',
  resolution: '768x512',
  fps: 24,
  quality: 'high',
  mood: 'cinematic',
  seedBase: '',
  customStoryboard: '',
  voiceoverFile: null,
  musicFile: null,
};

export interface AssembledJob {
  config: Record<string, unknown>;
  voiceover: File | null;
  music: File | null;
}

export type FieldErrors = Partial<Record<string, string>>;

/** Client-side checks that mirror the service's validation messages. */
export function validateForm(
  state: FormState,
  draft: StoryboardDraft | null,
): FieldErrors {
  const errors: FieldErrors = {};
  if (!state.prompt.trim()) {
    errors.prompt = 'Enter a prompt first.';
  }
  if (!Number.isInteger(state.fps) || state.fps < 15 || state.fps > 30) {
    errors.fps = 'fps must be an integer between 15 and 30.';
  }
  if (state.seedBase.trim() !== '') {
    const seed = Number(state.seedBase);
    if (!Number.isInteger(seed) || seed < 0) {
      errors.seedBase = 'Seed must be a non-negative integer.';
    }
  }
  if (state.mode === 'advanced' && draft !== null && !draftIsComplete(draft)) {
    errors.storyboard = 'Every scene card needs a description before saving.';
  }
  return errors;
}

/**
 * Build the request payload. Simple mode sends only the prompt plus the
 * always-safe defaults; advanced mode adds the storyboard and uploads.
 */
export function assembleJob(
  state: FormState,
  draft: StoryboardDraft | null,
): AssembledJob {
  const config: Record<string, unknown> = {
    prompt: state.prompt.trim(),
    mode: state.mode,
    resolution: state.resolution,
    fps: state.fps,
    quality: state.quality,
    mood: state.mood,
  };
  if (state.seedBase.trim() !== '') {
    config.seed_base = Number(state.seedBase);
  }
  if (state.mode === 'advanced') {
    if (draft !== null && draftIsComplete(draft)) {
      config.custom_storyboard = draftToJson(draft);
    } else if (state.customStoryboard.trim()) {
      config.custom_storyboard = state.customStoryboard;
    }
    return { config, voiceover: state.voiceoverFile, music: state.musicFile };
  }
  return { config, voiceover: null, music: null };
}

/** Mode switch keeps the prompt and render knobs, drops advanced-only inputs. */
export function switchMode(state: FormState, mode: RenderMode): FormState {
  if (mode === state.mode) return state;
  if (mode === 'advanced') {
    return { ...state, mode };
  }
  return {
    ...state,
    mode,
    customStoryboard: '',
    voiceoverFile: null,
    musicFile: null,
  };
}

/** True when leaving advanced mode would discard user input. */
export function switchNeedsConfirmation(state: FormState, mode: RenderMode): boolean {
  return (
    state.mode === 'advanced' &&
    mode === 'simple' &&
    (state.customStoryboard.trim() !== '' ||
      state.voiceoverFile !== null ||
      state.musicFile !== null)
  );
}
