/** Shapes mirrored from the render service's HTTP API. */

export type JobState =
  | 'queued'
  | 'storyboard'
  | 'keyframes'
  | 'interpolating'
  | 'audio'
  | 'compositing'
  | 'done'
  | 'failed';

export interface FallbackNotice {
  stage: string;
  reason: string;
  timestamp: string;
}

export interface ArtifactSummary {
  video_available: boolean;
  frame_count: number;
  fps: number;
  width: number;
  height: number;
}

export interface JobSnapshot {
  id: string;
  state: JobState;
  progress: number;
  fallbacks: FallbackNotice[];
  error: string | null;
  storyboard_available: boolean;
  artifacts: ArtifactSummary | null;
}

export interface SceneDoc {
  index: number;
  heading: string;
  description: string;
  visual_prompt: string;
  duration_s: number;
}

export interface StoryboardDoc {
  origin: 'generated' | 'custom' | 'fallback';
  scenes: SceneDoc[];
}

export interface ValidationDetail {
  field: string;
  message: string;
  allowed?: string[];
}

export type RenderMode = 'simple' | 'advanced';

/** Raw form state as the widgets hold it, before request assembly. */
export interface FormState {
  mode: RenderMode;
  prompt: string;
  resolution: string;
  fps: number;
  quality: string;
  mood: string;
  seedBase: string;
  customStoryboard: string;
  voiceoverFile: File | null;
  musicFile: File | null;
}
