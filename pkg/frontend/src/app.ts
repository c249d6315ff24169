/** Workbench bootstrap: wires the API client, state, and views together. */

import { ApiClient, ApiError } from "./api.js";
import { applyPostEdits } from "./srt.js";
import { WorkbenchState } from "./state.js";
import {
  el,
  renderRatingForm,
  renderSegmentList,
  renderTranslatePanel,
} from "./render.js";
import type { FramesPreview, Job, Segment } from "./types.js";

export class WorkbenchApp {
  private readonly framesBySegment = new Map<string, FramesPreview>();
  private selected: Segment | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly state: WorkbenchState,
    private readonly root: HTMLElement,
  ) {}

  mount(): void {
    this.root.replaceChildren(
      el("header", {}, [
        el("h1", {}, ["AD translation workbench"]),
        this.wizardForm(),
        this.blindToggle(),
      ]),
      el("main", {}, [
        el("section", { id: "segments" }),
        el("section", { id: "detail" }, [
          el("div", { id: "panel" }),
          el("div", { id: "rating" }),
          el("div", { id: "export" }),
        ]),
      ]),
      el("footer", { id: "status" }),
    );
  }

  private wizardForm(): HTMLElement {
    const video = el("input", { type: "file", id: "video-file" }) as HTMLInputElement;
    const script = el("input", { type: "file", id: "script-file" }) as HTMLInputElement;
    const language = el("select", { id: "source-language" }) as HTMLSelectElement;
    for (const lang of ["en", "de", "fr", "it"]) {
      language.append(el("option", { value: lang }, [lang]));
    }
    const button = el("button", { id: "create-project" }, ["create project"]);
    button.addEventListener("click", async () => {
      const videoFile = video.files?.[0];
      const scriptFile = script.files?.[0];
      if (!videoFile || !scriptFile) {
        this.status("choose a video and an AD script first");
        return;
      }
      try {
        const project = await this.api.createProject(videoFile, scriptFile, language.value);
        this.state.project = project;
        this.state.restorePostEdits();
        this.renderSegments();
        this.status(`project ${project.id}: ${project.segments.length} segments`);
      } catch (error) {
        this.showError(error);
      }
    });
    return el("div", { class: "wizard" }, [video, script, language, button]);
  }

  private blindToggle(): HTMLElement {
    const toggle = el("input", { type: "checkbox", id: "blind-mode" }) as HTMLInputElement;
    toggle.addEventListener("change", () => {
      this.state.blindMode = toggle.checked;
      this.renderDetail();
    });
    return el("label", { class: "blind-toggle" }, [toggle, "blind rating mode"]);
  }

  private renderSegments(): void {
    const container = this.root.querySelector<HTMLElement>("#segments");
    if (!container || !this.state.project) return;
    renderSegmentList(container, this.state.project.segments, {
      onSelect: (segment) => {
        this.selected = segment;
        this.renderDetail();
      },
    });
  }

  private renderDetail(): void {
    const panel = this.root.querySelector<HTMLElement>("#panel");
    const rating = this.root.querySelector<HTMLElement>("#rating");
    const exporter = this.root.querySelector<HTMLElement>("#export");
    if (!panel || !rating || !exporter || !this.selected) return;
    const segment = this.selected;
    renderTranslatePanel(panel, segment, this.state.jobsFor(segment.segment_id), {
      blindMode: this.state.blindMode,
      framesBySegment: this.framesBySegment,
      postEdit: this.state.getPostEdit(segment.segment_id),
      onRun: (params) => void this.runTranslation(segment, params),
      onRetry: (job) =>
        void this.runTranslation(segment, {
          target_lang: job.target_lang,
          modality: job.modality,
          frame_count: job.frame_count ?? 4,
        }),
      onPostEdit: (_job, text) => this.state.setPostEdit(segment.segment_id, text),
    });
    const newest = this.state.newestJob(segment.segment_id);
    renderRatingForm(rating, {
      blindMode: this.state.blindMode,
      modality: newest?.modality ?? "text_only",
      onSubmit: (submission) =>
        void this.api
          .submitRating(segment.segment_id, submission)
          .then(() => this.status("rating stored"))
          .catch((error) => this.showError(error)),
    });
    this.renderExport(exporter);
  }

  private async runTranslation(
    segment: Segment,
    params: { target_lang: string; modality: Job["modality"]; frame_count: number },
  ): Promise<void> {
    try {
      const job = await this.api.translateSegment(segment.segment_id, {
        target_lang: params.target_lang,
        modality: params.modality,
        frame_count: params.modality === "text_plus_frames" ? params.frame_count : null,
      });
      this.state.upsertJob(job);
      this.renderDetail();
      if (params.modality === "text_plus_frames") {
        this.framesBySegment.set(
          segment.segment_id,
          await this.api.segmentFrames(segment.segment_id, params.frame_count),
        );
      }
      const finished = await this.api.waitForJob(job.id);
      this.state.upsertJob(finished);
      this.renderDetail();
    } catch (error) {
      this.showError(error);
    }
  }

  private renderExport(container: HTMLElement): void {
    container.replaceChildren();
    const lang = el("select", { class: "export-lang" }) as HTMLSelectElement;
    for (const code of ["de", "fr", "it", "en"]) {
      lang.append(el("option", { value: code }, [code]));
    }
    const plain = el("button", { class: "export-srt" }, ["export SRT"]);
    plain.addEventListener("click", async () => {
      try {
        const bytes = await this.api.exportSrt(this.state.project!.id, lang.value);
        this.download(`${this.state.project!.id}.${lang.value}.srt`, bytes);
      } catch (error) {
        this.showError(error);
      }
    });
    const edited = el("button", { class: "export-srt-edited" }, ["export with post-edits"]);
    edited.addEventListener("click", async () => {
      try {
        const bytes = await this.api.exportSrt(this.state.project!.id, lang.value);
        const patched = applyPostEdits(
          new TextDecoder().decode(bytes),
          this.state.postEditsByIndex(),
        );
        this.download(
          `${this.state.project!.id}.${lang.value}.edited.srt`,
          new TextEncoder().encode(patched),
        );
      } catch (error) {
        this.showError(error);
      }
    });
    container.append(lang, plain, edited);
  }

  private download(name: string, bytes: Uint8Array): void {
    const blob = new Blob([bytes as BlobPart], { type: "application/x-subrip" });
    const link = el("a", {
      href: URL.createObjectURL(blob),
      download: name,
    });
    link.click();
    URL.revokeObjectURL(link.getAttribute("href")!);
  }

  private status(message: string): void {
    const footer = this.root.querySelector<HTMLElement>("#status");
    if (footer) footer.textContent = message;
  }

  private showError(error: unknown): void {
    if (error instanceof ApiError) {
      const stage = error.doc.stage ? ` [${error.doc.stage}]` : "";
      this.status(`error${stage}: ${error.doc.message}`);
    } else {
      this.status(`error: ${String(error)}`);
    }
  }
}

export function bootstrap(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const app = new WorkbenchApp(
    new ApiClient(""),
    new WorkbenchState(window.localStorage),
    root,
  );
  app.mount();
}
