import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderRatingForm } from "../src/render.js";
import type { RatingDoc, RatingSubmission, Segment } from "../src/types.js";
import { FetchStub, fixtureJson, fixtureText } from "./helpers.js";

const segments = fixtureJson<Segment[]>("segments.json");
const recordedRequest = fixtureJson<RatingSubmission>("rating_request.json");
const recordedResponse = fixtureJson<RatingDoc>("rating_response.json");
const segment = segments[0]!;

function fillAndSubmit(container: HTMLElement, values: [number, number, number],
                       rater: string): void {
  (container.querySelector(".rater-id") as HTMLInputElement).value = rater;
  const dims = ["fluency", "adequacy", "usefulness"] as const;
  dims.forEach((dim, i) => {
    const input = container.querySelector(`.score.${dim}`) as HTMLInputElement;
    input.value = String(values[i]);
  });
  (container.querySelector(".submit-rating") as HTMLButtonElement).click();
}

describe("rating form", () => {
  it("submits the recorded rating shape and it lands in the CSV export", async () => {
    const stub = new FetchStub()
      .route("POST", `/segments/${segment.segment_id}/ratings`, recordedResponse)
      .route(
        "GET",
        `/projects/${segment.segment_id.split(":")[0]}/ratings?format=csv`,
        fixtureText("ratings.csv"),
      );
    const api = new ApiClient("", stub.fetch);
    const submissions: RatingSubmission[] = [];
    const container = document.createElement("div");
    renderRatingForm(container, {
      modality: "text_plus_frames",
      makeKey: () => "fix-001",
      onSubmit: (rating) => {
        submissions.push(rating);
        void api.submitRating(segment.segment_id, rating);
      },
    });
    fillAndSubmit(container, [5, 6, 4], "A");
    expect(submissions[0]).toEqual(recordedRequest);
    await Promise.resolve();

    // the same flow was recorded against the live service: the rating row
    // appears in its CSV export
    const csv = await api.ratingsCsv(segment.segment_id.split(":")[0]!);
    expect(csv.split("\n")[0]).toBe(
      "rater_id,segment_id,modality,fluency,adequacy,usefulness",
    );
    expect(csv).toContain(`A,${segment.segment_id},text_plus_frames,5,6,4`);
  });

  it("out-of-range values are impossible by widget construction", () => {
    const container = document.createElement("div");
    const submissions: RatingSubmission[] = [];
    renderRatingForm(container, {
      modality: "text_only",
      onSubmit: (rating) => submissions.push(rating),
    });
    const input = container.querySelector(".score.fluency") as HTMLInputElement;
    expect(input.getAttribute("min")).toBe("0");
    expect(input.getAttribute("max")).toBe("6");
    input.value = "11";  // even a forced DOM value is clamped on submit
    (container.querySelector(".submit-rating") as HTMLButtonElement).click();
    expect(submissions[0]!.fluency).toBe(6);
  });

  it("rapid double submits share one idempotency key", () => {
    const container = document.createElement("div");
    const submissions: RatingSubmission[] = [];
    let counter = 0;
    renderRatingForm(container, {
      modality: "text_only",
      makeKey: () => `key-${counter++}`,
      onSubmit: (rating) => submissions.push(rating),
    });
    const button = container.querySelector(".submit-rating") as HTMLButtonElement;
    button.click();
    button.click();  // double click, no value change in between
    expect(submissions).toHaveLength(2);
    expect(submissions[0]!.idempotency_key).toBe(submissions[1]!.idempotency_key);

    const input = container.querySelector(".score.adequacy") as HTMLInputElement;
    input.value = "2";
    input.dispatchEvent(new Event("input"));
    button.click();
    expect(submissions[2]!.idempotency_key).not.toBe(submissions[0]!.idempotency_key);
  });

  it("blind mode hides the modality label", () => {
    const container = document.createElement("div");
    renderRatingForm(container, {
      modality: "text_plus_frames",
      blindMode: true,
      onSubmit: () => undefined,
    });
    expect(container.querySelector(".modality-label")).toBeNull();
    renderRatingForm(container, {
      modality: "text_plus_frames",
      onSubmit: () => undefined,
    });
    expect(container.querySelector(".modality-label")!.textContent).toBe("text + frames");
  });
});
