/** Test helpers: recorded-fixture loading and a scripted fetch double. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const FIXTURE_DIR = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixtureJson<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURE_DIR, name), "utf-8")) as T;
}

export function fixtureBytes(name: string): Uint8Array {
  return new Uint8Array(readFileSync(join(FIXTURE_DIR, name)));
}

export function fixtureText(name: string): string {
  return readFileSync(join(FIXTURE_DIR, name), "utf-8");
}

export interface RecordedRequest {
  method: string;
  path: string;
  body?: unknown;
}

type Responder = (request: RecordedRequest) => Response | undefined;

/** Minimal fetch double: exact-path routes plus optional fallthrough logic. */
export class FetchStub {
  readonly requests: RecordedRequest[] = [];
  private readonly routes = new Map<string, Response[]>();
  private responder: Responder | undefined;

  route(method: string, path: string, payload: unknown, status = 200): this {
    const key = `${method} ${path}`;
    const queue = this.routes.get(key) ?? [];
    queue.push(makeResponse(payload, status));
    this.routes.set(key, queue);
    return this;
  }

  respondWith(responder: Responder): this {
    this.responder = responder;
    return this;
  }

  get fetch(): typeof fetch {
    return (async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = typeof input === "string" ? input : input.toString();
      const method = (init?.method ?? "GET").toUpperCase();
      let body: unknown;
      if (typeof init?.body === "string") {
        try {
          body = JSON.parse(init.body);
        } catch {
          body = init.body;
        }
      } else if (init?.body) {
        body = init.body;
      }
      const recorded = { method, path: url, body };
      this.requests.push(recorded);
      const queue = this.routes.get(`${method} ${url}`);
      if (queue && queue.length) {
        return queue.length > 1 ? queue.shift()! : queue[0]!.clone();
      }
      const custom = this.responder?.(recorded);
      if (custom) return custom;
      return makeResponse({ code: "unscripted", stage: "", message: `no route for ${method} ${url}`, details: {} }, 404);
    }) as typeof fetch;
  }
}

export function makeResponse(payload: unknown, status = 200): Response {
  if (payload instanceof Uint8Array) {
    const copy = new Uint8Array(payload);
    return new Response(copy.buffer as ArrayBuffer, {
      status,
      headers: { "Content-Type": "application/octet-stream" },
    });
  }
  if (typeof payload === "string") {
    return new Response(payload, { status, headers: { "Content-Type": "text/csv" } });
  }
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
