/** Typed client for the pipeline service HTTP API.
 *
 * The workbench talks to the service exclusively through this module; every
 * number and thumbnail in the UI traces back to a field returned here.
 */

import type {
  ApiErrorDoc,
  FramesPreview,
  Job,
  Modality,
  Project,
  RatingDoc,
  RatingSubmission,
  Segment,
} from "./types.js";

export class ApiError extends Error {
  readonly doc: ApiErrorDoc;
  readonly status: number;

  constructor(doc: ApiErrorDoc, status: number) {
    super(doc.message);
    this.doc = doc;
    this.status = status;
  }
}

export interface TranslateParams {
  target_lang: string;
  modality?: Modality;
  frame_count?: number | null;
  model_id?: string | null;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(await this.errorDoc(response), response.status);
    }
    return (await response.json()) as T;
  }

  private async errorDoc(response: Response): Promise<ApiErrorDoc> {
    try {
      const doc = (await response.json()) as Partial<ApiErrorDoc>;
      return {
        code: doc.code ?? "unknown",
        stage: doc.stage ?? "",
        message: doc.message ?? `request failed (${response.status})`,
        details: doc.details ?? {},
      };
    } catch {
      return {
        code: "unknown",
        stage: "",
        message: `request failed (${response.status})`,
        details: {},
      };
    }
  }

  async createProject(video: File, script: File, language?: string): Promise<Project> {
    const form = new FormData();
    form.append("video", video);
    form.append("script", script);
    if (language) form.append("language", language);
    return this.request<Project>("/projects", { method: "POST", body: form });
  }

  getProject(projectId: string): Promise<Project> {
    return this.request<Project>(`/projects/${projectId}`);
  }

  listSegments(projectId: string): Promise<Segment[]> {
    return this.request<Segment[]>(`/projects/${projectId}/segments`);
  }

  translateSegment(segmentId: string, params: TranslateParams): Promise<Job> {
    return this.request<Job>(`/segments/${segmentId}/translate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(params),
    });
  }

  getJob(jobId: string): Promise<Job> {
    return this.request<Job>(`/jobs/${jobId}`);
  }

  /** Poll until the job reaches a terminal state. */
  async waitForJob(
    jobId: string,
    opts: { intervalMs?: number; timeoutMs?: number } = {},
  ): Promise<Job> {
    const interval = opts.intervalMs ?? 250;
    const deadline = Date.now() + (opts.timeoutMs ?? 30_000);
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.status === "done" || job.status === "failed") return job;
      if (Date.now() > deadline) return job;
      await sleep(interval);
    }
  }

  segmentFrames(segmentId: string, k?: number): Promise<FramesPreview> {
    const query = k ? `?k=${k}` : "";
    return this.request<FramesPreview>(`/segments/${segmentId}/frames${query}`);
  }

  submitRating(segmentId: string, rating: RatingSubmission): Promise<RatingDoc> {
    return this.request<RatingDoc>(`/segments/${segmentId}/ratings`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(rating),
    });
  }

  async ratingsCsv(projectId: string): Promise<string> {
    const response = await this.fetchFn(
      `${this.baseUrl}/projects/${projectId}/ratings?format=csv`,
    );
    if (!response.ok) throw new ApiError(await this.errorDoc(response), response.status);
    return response.text();
  }

  /** SRT export; the raw bytes are returned untouched. */
  async exportSrt(projectId: string, lang: string): Promise<Uint8Array> {
    const response = await this.fetchFn(
      `${this.baseUrl}/projects/${projectId}/export?lang=${encodeURIComponent(lang)}`,
    );
    if (!response.ok) throw new ApiError(await this.errorDoc(response), response.status);
    return new Uint8Array(await response.arrayBuffer());
  }
}
