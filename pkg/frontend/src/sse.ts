/** Server-sent-event client on top of fetch, with last-id reconnect.
 *
 * The stream carries `step` events (one per iteration) and a terminal
 * `summary` event; ids are contiguous so a dropped connection resumes
 * from the last id seen via the Last-Event-ID header.
 */

export interface SseEvent {
  id: number;
  event: string;
  data: any;
}

/** Parse complete events out of `buffer`; returns the unconsumed tail. */
export function parseSseBuffer(buffer: string): { events: SseEvent[]; rest: string } {
  const events: SseEvent[] = [];
  let rest = buffer;
  for (;;) {
    const split = rest.indexOf("\n\n");
    if (split < 0) break;
    const block = rest.slice(0, split);
    rest = rest.slice(split + 2);
    const fields: Record<string, string> = {};
    for (const line of block.split("\n")) {
      const colon = line.indexOf(": ");
      if (colon < 0) continue;
      fields[line.slice(0, colon)] = line.slice(colon + 2);
    }
    if (fields.data === undefined) continue;
    events.push({
      id: Number(fields.id ?? 0),
      event: fields.event ?? "message",
      data: JSON.parse(fields.data),
    });
  }
  return { events, rest };
}

export interface StreamOptions {
  lastId?: number;
  signal?: AbortSignal;
  /** Delay before reconnecting after a dropped connection (ms). */
  retryDelayMs?: number;
  maxRetries?: number;
}

/**
 * Consume a session event stream until its terminal `summary` event.
 * Reconnects with the last seen id when the transport drops mid-run.
 */
export async function streamEvents(
  url: string,
  onEvent: (event: SseEvent) => void,
  options: StreamOptions = {},
): Promise<void> {
  let lastId = options.lastId ?? 0;
  let retries = 0;
  const maxRetries = options.maxRetries ?? 5;
  for (;;) {
    let sawTerminal = false;
    try {
      const response = await fetch(url, {
        headers: { accept: "text/event-stream", "Last-Event-ID": String(lastId) },
        signal: options.signal,
      });
      if (!response.ok || !response.body) {
        throw new Error(`event stream failed: HTTP ${response.status}`);
      }
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        const { events, rest } = parseSseBuffer(buffer);
        buffer = rest;
        for (const event of events) {
          lastId = event.id;
          retries = 0;
          onEvent(event);
          if (event.event === "summary") sawTerminal = true;
        }
      }
      if (sawTerminal) return;
      // Clean close without a summary: the run is paused; stop following.
      return;
    } catch (err) {
      if (options.signal?.aborted) return;
      retries += 1;
      if (retries > maxRetries) throw err;
      await new Promise((resolve) => setTimeout(resolve, options.retryDelayMs ?? 500));
    }
  }
}
