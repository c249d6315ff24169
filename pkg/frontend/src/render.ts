/** DOM builders for the workbench views.
 *
 * Everything rendered traces to an API field: segment metadata from the
 * segments listing, moment bounds and sampled indices from the job record,
 * thumbnail URLs from the frames listing. Nothing is synthesized client-side.
 */

import type {
  FramesPreview,
  Job,
  Modality,
  RatingSubmission,
  Segment,
} from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export const MODALITY_LABELS: Record<Modality, string> = {
  text_only: "text-only",
  text_plus_frames: "text + frames",
};

// --- segment list ---------------------------------------------------------

export interface SegmentListOptions {
  onSelect?: (segment: Segment) => void;
  /** Fixed row height in px; the list renders only the visible window. */
  itemHeight?: number;
  viewportHeight?: number;
  overscan?: number;
}

export interface SegmentListHandle {
  container: HTMLElement;
  /** Re-render for a scroll offset (px). */
  scrollTo(offsetPx: number): void;
  renderedCount(): number;
}

export function renderSegmentList(
  container: HTMLElement,
  segments: Segment[],
  options: SegmentListOptions = {},
): SegmentListHandle {
  const itemHeight = options.itemHeight ?? 48;
  const viewportHeight = options.viewportHeight ?? 480;
  const overscan = options.overscan ?? 4;
  container.classList.add("segment-list");
  container.setAttribute("data-count", String(segments.length));

  let rendered = 0;

  function renderWindow(offsetPx: number): void {
    container.replaceChildren();
    const first = Math.max(0, Math.floor(offsetPx / itemHeight) - overscan);
    const visible = Math.ceil(viewportHeight / itemHeight) + 2 * overscan;
    const slice = segments.slice(first, first + visible);
    rendered = slice.length;

    container.append(
      el("div", { class: "spacer", style: `height:${first * itemHeight}px` }),
    );
    for (const segment of slice) {
      const row = el("div", {
        class: "segment-row",
        "data-segment-id": segment.segment_id,
        style: `height:${itemHeight}px`,
      });
      row.append(
        el("span", { class: "cue-index" }, [String(segment.index)]),
        el("span", { class: "cue-time" }, [`${segment.onset} --> ${segment.offset}`]),
        el("span", { class: "cue-text" }, [segment.clean_text]),
      );
      const badges = el("span", { class: "badges" });
      if (segment.flags.pace_constrained) badges.append(el("span", { class: "badge pace" }, ["pace"]));
      if (segment.flags.scene_change) badges.append(el("span", { class: "badge scene" }, ["scene"]));
      if (segment.flags.spoken_subtitle) badges.append(el("span", { class: "badge ut" }, ["UT"]));
      row.append(badges);
      for (const warning of segment.warnings) {
        row.append(el("div", { class: "segment-warning" }, [warning]));
      }
      if (options.onSelect) {
        row.addEventListener("click", () => options.onSelect!(segment));
      }
      container.append(row);
    }
    const below = segments.length - (first + slice.length);
    container.append(
      el("div", { class: "spacer", style: `height:${Math.max(0, below) * itemHeight}px` }),
    );
  }

  renderWindow(0);
  return {
    container,
    scrollTo: renderWindow,
    renderedCount: () => rendered,
  };
}

// --- translate panel --------------------------------------------------------

export interface TranslatePanelOptions {
  blindMode?: boolean;
  framesBySegment?: Map<string, FramesPreview>;
  onRun?: (params: { target_lang: string; modality: Modality; frame_count: number }) => void;
  onRetry?: (job: Job) => void;
  onPostEdit?: (job: Job, text: string) => void;
  postEdit?: string;
}

function jobCard(job: Job, newest: boolean, options: TranslatePanelOptions): HTMLElement {
  const card = el("div", {
    class: `job-card status-${job.status}${newest ? " newest" : ""}`,
    "data-job-id": job.id,
    "data-modality": job.modality,
  });
  const header = el("div", { class: "job-header" });
  if (!options.blindMode) {
    header.append(el("span", { class: "modality-label" }, [MODALITY_LABELS[job.modality]]));
  }
  header.append(el("span", { class: "job-status" }, [job.status]));
  header.append(el("span", { class: "job-target" }, [job.target_lang]));
  if (newest) header.append(el("span", { class: "newest-mark" }, ["newest"]));
  card.append(header);

  if (job.moment) {
    card.append(
      el("div", { class: "moment" }, [
        `moment ${job.moment.start_s.toFixed(2)}s - ${job.moment.end_s.toFixed(2)}s ` +
          `(score ${job.moment.score.toFixed(2)}` +
          `${job.moment.used_fallback ? ", fallback" : ""})`,
      ]),
    );
  }
  if (job.frame_indices && job.frame_indices.length) {
    card.append(
      el("div", { class: "frame-indices" }, [
        `sampled frames: ${job.frame_indices.join(", ")}`,
      ]),
    );
    const preview = options.framesBySegment?.get(job.segment_id);
    if (preview) {
      const strip = el("div", { class: "thumbnails" });
      for (const frame of preview.frames) {
        strip.append(
          el("img", {
            class: "thumbnail",
            src: frame.url,
            alt: `frame ${frame.index} at ${frame.timestamp_s.toFixed(2)}s`,
          }),
        );
      }
      card.append(strip);
    }
  }
  if (job.status === "done" && job.result) {
    card.append(el("div", { class: "job-output" }, [job.result.output_text]));
    const editor = el("textarea", { class: "post-edit" }) as HTMLTextAreaElement;
    editor.value = options.postEdit ?? job.result.output_text;
    editor.addEventListener("input", () => options.onPostEdit?.(job, editor.value));
    card.append(el("label", {}, ["post-edit"]), editor);
  }
  if (job.status === "failed" && job.error) {
    card.append(
      el("div", { class: "job-error" }, [
        `failed in stage "${job.error.stage}": ${job.error.message}`,
      ]),
    );
    const retry = el("button", { class: "retry" }, ["retry"]);
    retry.addEventListener("click", () => options.onRetry?.(job));
    card.append(retry);
  }
  return card;
}

export function renderTranslatePanel(
  container: HTMLElement,
  segment: Segment,
  jobs: Job[],
  options: TranslatePanelOptions = {},
): HTMLElement {
  container.replaceChildren();
  container.classList.add("translate-panel");

  const controls = el("div", { class: "run-controls" });
  const langInput = el("select", { class: "target-lang" }) as HTMLSelectElement;
  for (const lang of ["de", "fr", "it", "en"]) {
    langInput.append(el("option", { value: lang }, [lang]));
  }
  const modalityInput = el("select", { class: "modality" }) as HTMLSelectElement;
  modalityInput.append(el("option", { value: "text_only" }, ["text-only"]));
  modalityInput.append(el("option", { value: "text_plus_frames" }, ["text + frames"]));
  const frameInput = el("input", {
    class: "frame-count",
    type: "number",
    min: "1",
    max: "32",
    value: "4",
  }) as HTMLInputElement;
  const runButton = el("button", { class: "run" }, ["translate"]);
  runButton.addEventListener("click", () => {
    const frames = Math.min(32, Math.max(1, Number(frameInput.value) || 4));
    options.onRun?.({
      target_lang: langInput.value,
      modality: modalityInput.value as Modality,
      frame_count: frames,
    });
  });
  controls.append(langInput, modalityInput, frameInput, runButton);
  container.append(
    el("h3", {}, [`#${segment.index} ${segment.onset} --> ${segment.offset}`]),
    el("p", { class: "source-text" }, [segment.clean_text]),
    controls,
  );

  const cards = el("div", { class: "job-cards" });
  jobs.forEach((job, i) => {
    cards.append(jobCard(job, i === jobs.length - 1, options));
  });
  container.append(cards);
  return container;
}

// --- rating form --------------------------------------------------------------

export interface RatingFormOptions {
  blindMode?: boolean;
  /** Modality of the translation being rated (from the job record). */
  modality: Modality;
  raterId?: string;
  onSubmit: (rating: RatingSubmission) => void;
  makeKey?: () => string;
}

const DIMENSIONS = ["fluency", "adequacy", "usefulness"] as const;

export function renderRatingForm(
  container: HTMLElement,
  options: RatingFormOptions,
): HTMLElement {
  container.replaceChildren();
  container.classList.add("rating-form");
  if (!options.blindMode) {
    container.append(
      el("div", { class: "modality-label" }, [MODALITY_LABELS[options.modality]]),
    );
  }
  const rater = el("input", {
    class: "rater-id",
    type: "text",
    value: options.raterId ?? "",
    placeholder: "rater id",
  }) as HTMLInputElement;
  container.append(rater);

  const inputs: Record<string, HTMLInputElement> = {};
  for (const dim of DIMENSIONS) {
    const input = el("input", {
      class: `score ${dim}`,
      type: "number",
      min: "0",
      max: "6",
      step: "1",
      value: "3",
    }) as HTMLInputElement;
    inputs[dim] = input;
    container.append(el("label", {}, [dim]), input);
  }

  // one idempotency key per entry session: rapid double clicks share it
  let key = (options.makeKey ?? defaultKey)();
  const clamp = (value: string) =>
    Math.min(6, Math.max(0, Math.round(Number(value) || 0)));
  const submit = el("button", { class: "submit-rating" }, ["submit rating"]);
  submit.addEventListener("click", () => {
    options.onSubmit({
      rater_id: rater.value || "anonymous",
      fluency: clamp(inputs.fluency!.value),
      adequacy: clamp(inputs.adequacy!.value),
      usefulness: clamp(inputs.usefulness!.value),
      modality: options.modality,
      idempotency_key: key,
    });
  });
  for (const input of Object.values(inputs)) {
    input.addEventListener("input", () => {
      key = (options.makeKey ?? defaultKey)(); // new values, new submission identity
    });
  }
  container.append(submit);
  return container;
}

function defaultKey(): string {
  return `r-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 10)}`;
}
