import { describe, expect, it } from "vitest";

import { renderSegmentList } from "../src/render.js";
import type { Segment } from "../src/types.js";
import { fixtureJson } from "./helpers.js";

const segments = fixtureJson<Segment[]>("segments.json");
const bigList = fixtureJson<Segment[]>("segments_300.json");

describe("segment list", () => {
  it("renders one row per cue, matching the recorded cue count", () => {
    const container = document.createElement("div");
    const handle = renderSegmentList(container, segments, { viewportHeight: 600 });
    expect(container.getAttribute("data-count")).toBe("3");
    expect(container.querySelectorAll(".segment-row")).toHaveLength(3);
    expect(handle.renderedCount()).toBe(3);
    const first = container.querySelector(".segment-row")!;
    expect(first.querySelector(".cue-index")!.textContent).toBe("1");
    expect(first.querySelector(".cue-time")!.textContent).toContain("00:00:01,000");
  });

  it("shows markup badges and warnings from the API fields only", () => {
    const container = document.createElement("div");
    renderSegmentList(container, segments, { viewportHeight: 600 });
    const rows = [...container.querySelectorAll(".segment-row")];
    expect(rows[1]!.querySelector(".badge.pace")).not.toBeNull();
    expect(rows[2]!.querySelector(".badge.ut")).not.toBeNull();
    expect(rows[0]!.querySelector(".badge.pace")).toBeNull();
    expect(container.querySelectorAll(".segment-warning")).toHaveLength(
      segments.reduce((n, s) => n + s.warnings.length, 0),
    );
  });

  it("virtualizes a 300-segment script and first-paints quickly", () => {
    const container = document.createElement("div");
    const started = performance.now();
    const handle = renderSegmentList(container, bigList, {
      itemHeight: 48,
      viewportHeight: 480,
    });
    const elapsed = performance.now() - started;
    expect(bigList).toHaveLength(300);
    expect(container.getAttribute("data-count")).toBe("300");
    // only the visible window plus overscan is materialized
    expect(handle.renderedCount()).toBeLessThan(40);
    expect(elapsed).toBeLessThan(2000);
  });

  it("scrolling re-renders the window including the last cue", () => {
    const container = document.createElement("div");
    const handle = renderSegmentList(container, bigList, {
      itemHeight: 48,
      viewportHeight: 480,
    });
    handle.scrollTo(299 * 48);
    const ids = [...container.querySelectorAll(".segment-row")].map((row) =>
      row.getAttribute("data-segment-id"),
    );
    expect(ids).toContain(bigList[299]!.segment_id);
    expect(handle.renderedCount()).toBeLessThan(40);
  });

  it("selection callback delivers the clicked segment", () => {
    const container = document.createElement("div");
    const clicked: string[] = [];
    renderSegmentList(container, segments, {
      viewportHeight: 600,
      onSelect: (segment) => clicked.push(segment.segment_id),
    });
    const row = container.querySelectorAll(".segment-row")[2] as HTMLElement;
    row.click();
    expect(clicked).toEqual([segments[2]!.segment_id]);
  });
});
