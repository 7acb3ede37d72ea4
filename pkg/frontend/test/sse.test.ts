import { describe, expect, it } from "vitest";

import { parseSseBuffer } from "../src/sse.js";

const EVENT = (id: number, type: string, data: unknown) =>
  `id: ${id}\nevent: ${type}\ndata: ${JSON.stringify(data)}\n\n`;

describe("SSE parsing", () => {
  it("parses complete events in order", () => {
    const buffer = EVENT(1, "step", { a: 1 }) + EVENT(2, "summary", { b: 2 });
    const { events, rest } = parseSseBuffer(buffer);
    expect(rest).toBe("");
    expect(events.map((e) => e.id)).toEqual([1, 2]);
    expect(events[0].event).toBe("step");
    expect(events[0].data).toEqual({ a: 1 });
    expect(events[1].event).toBe("summary");
  });

  it("keeps partial events in the tail buffer", () => {
    const full = EVENT(1, "step", { record: { iteration: 0 } });
    const head = full.slice(0, 25);
    const tail = full.slice(25);
    const first = parseSseBuffer(head);
    expect(first.events).toEqual([]);
    expect(first.rest).toBe(head);
    const second = parseSseBuffer(first.rest + tail);
    expect(second.events.length).toBe(1);
    expect(second.rest).toBe("");
  });

  it("handles json payloads containing newline-free colons", () => {
    const { events } = parseSseBuffer(
      EVENT(3, "step", { note: "a: b", nested: { x: 1 } }),
    );
    expect(events[0].data.note).toBe("a: b");
    expect(events[0].data.nested.x).toBe(1);
  });
});
