/** Minimal client-side SRT handling for post-edit export.
 *
 * The plain export button always downloads the service's bytes unmodified;
 * this module exists only for "export with post-edits", which swaps cue text
 * verbatim while leaving indices, timecodes, and layout untouched.
 */

export interface SrtCue {
  index: number;
  timing: string;
  text: string;
}

export function parseSrt(text: string): SrtCue[] {
  const cues: SrtCue[] = [];
  const blocks = text.replace(/\r\n/g, "\n").split(/\n\n+/);
  for (const block of blocks) {
    const lines = block.split("\n").filter((line, i) => i < 2 || line !== "");
    if (lines.length < 2) continue;
    const index = Number.parseInt(lines[0]!.trim(), 10);
    if (!Number.isFinite(index)) continue;
    cues.push({
      index,
      timing: lines[1]!.trim(),
      text: lines.slice(2).join("\n"),
    });
  }
  return cues;
}

export function serializeSrt(cues: SrtCue[]): string {
  // canonical layout: blank line after every cue, including the last
  const body = cues.map((cue) => `${cue.index}\n${cue.timing}\n${cue.text}\n`).join("\n");
  return cues.length ? body + "\n" : body;
}

/** Replace cue text by segment index; edited text lands verbatim. */
export function applyPostEdits(srtText: string, editsByIndex: Map<number, string>): string {
  const cues = parseSrt(srtText).map((cue) => {
    const edit = editsByIndex.get(cue.index);
    return edit === undefined ? cue : { ...cue, text: edit };
  });
  return serializeSrt(cues);
}
