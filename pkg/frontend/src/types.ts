/** Types mirroring the service's JSON documents. */

export type Modality = "text_only" | "text_plus_frames";

export interface MarkupFlags {
  pace_constrained: boolean;
  double_pace_marker: boolean;
  scene_change: boolean;
  spoken_subtitle: boolean;
}

export interface Segment {
  segment_id: string;
  index: number;
  onset: string;
  offset: string;
  raw_text: string;
  clean_text: string;
  flags: MarkupFlags;
  warnings: string[];
}

export interface Project {
  id: string;
  created_at: string;
  language: string;
  media_probe: { fps: number; duration_s: number };
  settings: {
    model_id: string;
    buffer_s: number;
    sampler: Record<string, number | string>;
  };
  segments: Segment[];
}

export interface Moment {
  start_s: number;
  end_s: number;
  score: number;
  used_fallback: boolean;
  warning?: string | null;
}

export interface JobError {
  code: string;
  stage: string;
  message: string;
}

export interface Job {
  id: string;
  sequence: number;
  project_id: string;
  segment_id: string;
  segment_index: number;
  source_lang: string;
  target_lang: string;
  modality: Modality;
  frame_count: number | null;
  model_id: string;
  status: "queued" | "running" | "done" | "failed";
  stage: string | null;
  error: JobError | null;
  created_at: string;
  updated_at: string;
  window: { start_s: number; end_s: number } | null;
  moment: Moment | null;
  frame_indices: number[] | null;
  frame_timestamps_s: number[] | null;
  english_pivot_text: string | null;
  result: {
    output_text: string;
    input_tokens: number;
    output_tokens: number;
    latency_ms: number;
  } | null;
}

export interface FramePreviewEntry {
  n: number;
  index: number;
  timestamp_s: number;
  url: string;
}

export interface FramesPreview {
  segment_id: string;
  window: { start_s: number; end_s: number };
  moment: Moment;
  fps: number;
  frames: FramePreviewEntry[];
}

export interface RatingSubmission {
  rater_id: string;
  fluency: number;
  adequacy: number;
  usefulness: number;
  modality: Modality;
  idempotency_key?: string;
}

export interface RatingDoc extends RatingSubmission {
  segment_id: string;
  submitted_at?: string;
}

export interface ApiErrorDoc {
  code: string;
  stage: string;
  message: string;
  details: Record<string, unknown>;
}
