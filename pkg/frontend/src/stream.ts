/**
 * Live turn updates for one conversation.
 *
 * Prefers the server-sent event stream and falls back to polling the
 * records endpoint when the stream is unavailable or breaks. Polling
 * re-tries the stream occasionally so a recovered server upgrades back
 * to live events.
 */

import { ApiClient } from "./api.js";
import { asObj, field, JObj, parseJson } from "./jsontext.js";

export type StreamStatus = "live" | "polling" | "down";

export interface EventSourceLike {
  addEventListener(type: string, handler: (ev: MessageEvent) => void): void;
  onerror: ((ev: Event) => void) | null;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export interface TurnStreamOptions {
  esFactory?: EventSourceFactory | null;
  pollMs?: number;
  upgradeEveryNPolls?: number;
}

export interface TurnStreamHandlers {
  onTurn(record: JObj, raw: string): void;
  onStatus(status: StreamStatus): void;
}

function defaultFactory(): EventSourceFactory | null {
  if (typeof EventSource === "undefined") return null;
  return (url) => new EventSource(url);
}

export class TurnStream {
  private es: EventSourceLike | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private pollsSinceUpgrade = 0;
  private seenTurns = 0;
  private stopped = false;
  private status: StreamStatus | null = null;
  private readonly esFactory: EventSourceFactory | null;
  private readonly pollMs: number;
  private readonly upgradeEvery: number;

  constructor(
    private readonly api: ApiClient,
    private readonly convId: string,
    private readonly handlers: TurnStreamHandlers,
    options: TurnStreamOptions = {},
  ) {
    this.esFactory = options.esFactory !== undefined ? options.esFactory : defaultFactory();
    this.pollMs = options.pollMs ?? 2000;
    this.upgradeEvery = options.upgradeEveryNPolls ?? 5;
  }

  /** Turns already rendered; polling only reports records beyond this count. */
  primeSeen(turns: number): void {
    this.seenTurns = turns;
  }

  start(): void {
    this.stopped = false;
    if (!this.tryEventSource()) this.startPolling();
  }

  stop(): void {
    this.stopped = true;
    this.closeEs();
    this.stopPolling();
  }

  private setStatus(status: StreamStatus): void {
    if (this.status !== status) {
      this.status = status;
      this.handlers.onStatus(status);
    }
  }

  private closeEs(): void {
    if (this.es) {
      this.es.close();
      this.es = null;
    }
  }

  private tryEventSource(): boolean {
    if (!this.esFactory) return false;
    let es: EventSourceLike;
    try {
      es = this.esFactory(
        `${this.api.base}/api/conversations/${encodeURIComponent(this.convId)}/events`,
      );
    } catch {
      return false;
    }
    this.es = es;
    es.addEventListener("turn", (ev) => {
      const raw = String(ev.data);
      const doc = asObj(parseJson(raw), "turn event");
      this.noteTurn(doc);
      this.handlers.onTurn(doc, raw);
    });
    es.onerror = () => {
      if (this.stopped) return;
      this.closeEs();
      this.startPolling();
    };
    this.setStatus("live");
    return true;
  }

  private noteTurn(doc: JObj): void {
    const turn = field.num(doc, "turn").value;
    if (turn > this.seenTurns) this.seenTurns = turn;
  }

  private startPolling(): void {
    if (this.pollTimer || this.stopped) return;
    this.setStatus("polling");
    this.pollsSinceUpgrade = 0;
    this.pollTimer = setInterval(() => void this.pollOnce(), this.pollMs);
  }

  private stopPolling(): void {
    if (this.pollTimer) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  private async pollOnce(): Promise<void> {
    if (this.stopped) return;
    this.pollsSinceUpgrade++;
    if (this.esFactory && this.pollsSinceUpgrade >= this.upgradeEvery) {
      this.pollsSinceUpgrade = 0;
      this.stopPolling();
      if (this.tryEventSource()) return;
      this.startPolling();
      return;
    }
    try {
      const { docs } = await this.api.records(this.convId);
      this.setStatus("polling");
      for (const doc of docs.slice(this.seenTurns)) {
        const record = asObj(doc, "record");
        this.noteTurn(record);
        // re-serialize loses nothing: lexemes live in the parsed doc
        this.handlers.onTurn(record, "");
      }
    } catch {
      this.setStatus("down");
    }
  }
}
