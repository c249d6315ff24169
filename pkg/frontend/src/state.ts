/** Client-side session state: retained job cards, post-edit drafts, blind mode.
 *
 * Post-edits persist to storage on every keystroke so a dropped connection
 * (or reload) loses nothing typed.
 */

import type { Job, Project } from "./types.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export class WorkbenchState {
  project: Project | null = null;
  blindMode = false;
  private jobsBySegment = new Map<string, Job[]>();
  private postEdits = new Map<string, string>();

  constructor(private readonly storage?: StorageLike) {}

  /** Insert or update a job; all results for a segment are retained so
   * text-only and multimodal outputs can sit side by side. */
  upsertJob(job: Job): void {
    const jobs = this.jobsBySegment.get(job.segment_id) ?? [];
    const existing = jobs.findIndex((j) => j.id === job.id);
    if (existing >= 0) {
      jobs[existing] = job;
    } else {
      jobs.push(job);
    }
    jobs.sort((a, b) => a.sequence - b.sequence);
    this.jobsBySegment.set(job.segment_id, jobs);
  }

  jobsFor(segmentId: string): Job[] {
    return this.jobsBySegment.get(segmentId) ?? [];
  }

  newestJob(segmentId: string): Job | undefined {
    const jobs = this.jobsFor(segmentId);
    return jobs[jobs.length - 1];
  }

  allDoneFor(targetLang: string): boolean {
    if (!this.project) return false;
    return this.project.segments.every((seg) =>
      this.jobsFor(seg.segment_id).some(
        (j) => j.status === "done" && j.target_lang === targetLang,
      ),
    );
  }

  // --- post-edit drafts ---

  private storageKey(): string {
    return `adtrans-postedits:${this.project?.id ?? "none"}`;
  }

  setPostEdit(segmentId: string, text: string): void {
    this.postEdits.set(segmentId, text);
    this.persistPostEdits();
  }

  getPostEdit(segmentId: string): string | undefined {
    return this.postEdits.get(segmentId);
  }

  postEditsByIndex(): Map<number, string> {
    const byIndex = new Map<number, string>();
    if (!this.project) return byIndex;
    for (const seg of this.project.segments) {
      const edit = this.postEdits.get(seg.segment_id);
      if (edit !== undefined) byIndex.set(seg.index, edit);
    }
    return byIndex;
  }

  private persistPostEdits(): void {
    if (!this.storage) return;
    this.storage.setItem(
      this.storageKey(),
      JSON.stringify(Object.fromEntries(this.postEdits)),
    );
  }

  restorePostEdits(): void {
    if (!this.storage) return;
    const raw = this.storage.getItem(this.storageKey());
    if (!raw) return;
    try {
      const entries = JSON.parse(raw) as Record<string, string>;
      this.postEdits = new Map(Object.entries(entries));
    } catch {
      // ignore a corrupt draft blob; drafts are best-effort
    }
  }
}
