import { describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { WorkbenchApp } from "../src/app.js";
import { WorkbenchState } from "../src/state.js";
import type { Project } from "../src/types.js";
import { FetchStub, fixtureJson } from "./helpers.js";

const project = fixtureJson<Project>("project.json");

function mountApp(stub: FetchStub): { root: HTMLElement; app: WorkbenchApp } {
  const root = document.createElement("div");
  document.body.append(root);
  const app = new WorkbenchApp(new ApiClient("", stub.fetch), new WorkbenchState(), root);
  app.mount();
  return { root, app };
}

function setFiles(input: HTMLInputElement, file: File): void {
  Object.defineProperty(input, "files", { value: [file], configurable: true });
}

describe("workbench app", () => {
  it("project wizard renders the segment list from the created project", async () => {
    const stub = new FetchStub().route("POST", "/projects", project);
    const { root } = mountApp(stub);
    setFiles(
      root.querySelector("#video-file") as HTMLInputElement,
      new File(['{"fps": 25.0, "duration_s": 60.0}'], "clip.json"),
    );
    setFiles(
      root.querySelector("#script-file") as HTMLInputElement,
      new File(["1\n00:00:01,000 --> 00:00:03,000\nA man enters.\n"], "script.srt"),
    );
    (root.querySelector("#create-project") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(root.querySelector("#segments .segment-row")).not.toBeNull();
    });
    expect(root.querySelectorAll("#segments .segment-row")).toHaveLength(3);
    expect(root.querySelector("#status")!.textContent).toContain(project.id);
  });

  it("malformed script shows the API error banner with the line number", async () => {
    const stub = new FetchStub().route(
      "POST",
      "/projects",
      {
        code: "script_parse",
        stage: "parse",
        message: "line 2: cue 1: malformed timing line 'nope'",
        details: { line: 2 },
      },
      422,
    );
    const { root } = mountApp(stub);
    setFiles(root.querySelector("#video-file") as HTMLInputElement,
             new File(["{}"], "clip.json"));
    setFiles(root.querySelector("#script-file") as HTMLInputElement,
             new File(["garbage"], "script.srt"));
    (root.querySelector("#create-project") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(root.querySelector("#status")!.textContent).toContain("line 2");
    });
    expect(root.querySelector("#status")!.textContent).toContain("[parse]");
  });

  it("missing uploads prompt instead of calling the API", () => {
    const stub = new FetchStub();
    const { root } = mountApp(stub);
    (root.querySelector("#create-project") as HTMLButtonElement).click();
    expect(stub.requests).toHaveLength(0);
    expect(root.querySelector("#status")!.textContent).toContain("choose a video");
  });
});
