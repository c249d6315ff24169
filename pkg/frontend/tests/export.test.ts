import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { applyPostEdits, parseSrt, serializeSrt } from "../src/srt.js";
import { WorkbenchState } from "../src/state.js";
import type { Project } from "../src/types.js";
import { FetchStub, fixtureBytes, fixtureJson } from "./helpers.js";

const project = fixtureJson<Project>("project.json");
const exported = fixtureBytes("export.de.srt");

describe("export", () => {
  it("export button path yields the service bytes unmodified", async () => {
    const stub = new FetchStub().route(
      "GET",
      `/projects/${project.id}/export?lang=de`,
      exported,
    );
    const api = new ApiClient("", stub.fetch);
    const bytes = await api.exportSrt(project.id, "de");
    expect(Array.from(bytes)).toEqual(Array.from(exported));
  });

  it("srt parse/serialize round-trips the service export byte-for-byte", () => {
    const text = new TextDecoder().decode(exported);
    expect(serializeSrt(parseSrt(text))).toBe(text);
  });

  it("post-edit text lands in the edited export verbatim", () => {
    const text = new TextDecoder().decode(exported);
    const edit = "Ein Mann betritt den Raum.  (geprüft)";
    const patched = applyPostEdits(text, new Map([[1, edit]]));
    const cues = parseSrt(patched);
    expect(cues[0]!.text).toBe(edit);
    // untouched cues and all timecodes stay identical
    const original = parseSrt(text);
    expect(cues[1]).toEqual(original[1]);
    expect(cues.map((c) => c.timing)).toEqual(original.map((c) => c.timing));
  });

  it("post-edits survive a connection loss via storage", () => {
    const backing = new Map<string, string>();
    const storage = {
      getItem: (key: string) => backing.get(key) ?? null,
      setItem: (key: string, value: string) => void backing.set(key, value),
    };
    const state = new WorkbenchState(storage);
    state.project = project;
    const segId = project.segments[0]!.segment_id;
    state.setPostEdit(segId, "Behalte diesen Text.");

    const revived = new WorkbenchState(storage);
    revived.project = project;
    revived.restorePostEdits();
    expect(revived.getPostEdit(segId)).toBe("Behalte diesen Text.");
    expect(revived.postEditsByIndex().get(1)).toBe("Behalte diesen Text.");
  });
});
