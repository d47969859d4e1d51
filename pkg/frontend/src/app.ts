/**
 * Application shell: conversation lifecycle, panels, and live updates.
 *
 * The page is a pure consumer of the HTTP API. Turn records arrive either
 * as POST responses or over the event stream; both paths land in the same
 * store keyed by turn number, so duplicates collapse and the newest record
 * drives the panels.
 */

import { ApiClient, ApiError } from "./api.js";
import { ChatPanel } from "./chat.js";
import { buildConceptTable, GraphView, TABLE_FALLBACK_THRESHOLD } from "./graphview.js";
import { renderNodePanel, renderTurnPanel } from "./inspector.js";
import { JObj } from "./jsontext.js";
import { StreamStatus, TurnStream, TurnStreamOptions } from "./stream.js";
import {
  conversationInfo,
  packInfo,
  turnRecord,
  TurnRecord,
  wmSnapshot,
  WmSnapshot,
} from "./types.js";

export interface AppOptions {
  stream?: TurnStreamOptions;
}

export class App {
  readonly chat: ChatPanel;
  private readonly doc: Document;
  private graph: GraphView | null = null;
  private stream: TurnStream | null = null;
  private convId: string | null = null;
  private records = new Map<number, TurnRecord>();
  private snapshot: WmSnapshot | null = null;
  private selectedNode: string | null = null;
  private retryAction: (() => void) | null = null;

  private readonly convSelect: HTMLSelectElement;
  private readonly seedSelect: HTMLSelectElement;
  private readonly banner: HTMLElement;
  private readonly statusBadge: HTMLElement;
  private readonly graphHost: HTMLElement;
  private readonly turnHost: HTMLElement;
  private readonly nodeHost: HTMLElement;

  constructor(
    root: HTMLElement,
    private readonly api: ApiClient,
    private readonly options: AppOptions = {},
  ) {
    this.doc = root.ownerDocument;
    root.innerHTML = `
      <header class="topbar">
        <h1 id="pack-name">memory inspector</h1>
        <label>conversation
          <select id="conv-select"></select>
        </label>
        <label>seed
          <select id="seed-select"><option value="">(none)</option></select>
        </label>
        <button id="new-conv">New conversation</button>
        <span id="status-badge" class="badge" data-status="idle">idle</span>
      </header>
      <div id="banner" class="banner hidden"></div>
      <main class="columns">
        <section id="chat-root" class="chat-column"></section>
        <section id="graph-root" class="graph-column">
          <canvas id="wm-canvas" width="760" height="560"></canvas>
          <div id="graph-table-host" class="hidden"></div>
        </section>
        <aside class="inspector-column">
          <div id="turn-host"></div>
          <div id="node-host"></div>
        </aside>
      </main>`;

    this.convSelect = root.querySelector("#conv-select") as HTMLSelectElement;
    this.seedSelect = root.querySelector("#seed-select") as HTMLSelectElement;
    this.banner = root.querySelector("#banner") as HTMLElement;
    this.statusBadge = root.querySelector("#status-badge") as HTMLElement;
    this.graphHost = root.querySelector("#graph-root") as HTMLElement;
    this.turnHost = root.querySelector("#turn-host") as HTMLElement;
    this.nodeHost = root.querySelector("#node-host") as HTMLElement;

    this.chat = new ChatPanel(
      root.querySelector("#chat-root") as HTMLElement,
      (text) => void this.submit(text),
    );

    const canvas = root.querySelector("#wm-canvas") as HTMLCanvasElement;
    this.graph = new GraphView(canvas, {
      onSelect: (id) => {
        this.selectedNode = id;
        this.renderNodePanel();
      },
    });

    (root.querySelector("#new-conv") as HTMLButtonElement).addEventListener("click", () => {
      void this.newConversation(this.seedSelect.value || null);
    });
    this.convSelect.addEventListener("change", () => {
      if (this.convSelect.value) void this.selectConversation(this.convSelect.value);
    });
  }

  async init(): Promise<void> {
    await this.guard(async () => {
      const pack = packInfo(await this.api.pack());
      const title = this.doc.querySelector("#pack-name") as HTMLElement;
      title.textContent = `${pack.name} inspector`;
      for (const seed of pack.seeds) {
        const opt = this.doc.createElement("option");
        opt.value = seed;
        opt.textContent = seed;
        this.seedSelect.appendChild(opt);
      }
      await this.refreshConversationList();
      this.renderTurnPanel();
    }, () => void this.init());
  }

  get conversationId(): string | null {
    return this.convId;
  }

  recordList(): TurnRecord[] {
    return [...this.records.entries()].sort((a, b) => a[0] - b[0]).map(([, r]) => r);
  }

  currentSnapshot(): WmSnapshot | null {
    return this.snapshot;
  }

  private async refreshConversationList(): Promise<void> {
    const infos = (await this.api.conversations()).map(conversationInfo);
    this.convSelect.textContent = "";
    const blank = this.doc.createElement("option");
    blank.value = "";
    blank.textContent = infos.length ? "pick one" : "(none yet)";
    this.convSelect.appendChild(blank);
    for (const info of infos) {
      const opt = this.doc.createElement("option");
      opt.value = info.id;
      opt.textContent = `${info.id} (${info.turns.text} turns)`;
      if (info.id === this.convId) opt.selected = true;
      this.convSelect.appendChild(opt);
    }
  }

  async newConversation(seed: string | null = null): Promise<void> {
    await this.guard(async () => {
      const created = await this.api.createConversation(seed);
      await this.attach(String((created as JObj).id), true);
      await this.refreshConversationList();
    }, () => void this.newConversation(seed));
  }

  async selectConversation(convId: string): Promise<void> {
    await this.guard(
      () => this.attach(convId, false),
      () => void this.selectConversation(convId),
    );
  }

  private async attach(convId: string, fresh: boolean): Promise<void> {
    this.stream?.stop();
    this.records.clear();
    this.snapshot = null;
    this.selectedNode = null;
    this.convId = convId;
    this.chat.clear();
    this.chat.addInfo(fresh ? `new conversation ${convId}` : `joined ${convId}`);

    if (!fresh) {
      const { docs } = await this.api.records(convId);
      for (const doc of docs) this.storeRecord(turnRecord(doc));
      for (const record of this.recordList()) {
        if (record.user) this.chat.addUser(record.user);
        this.chat.addBot(record.response);
      }
    }
    await this.refreshSnapshot();
    this.renderTurnPanel();
    this.renderNodePanel();

    this.stream = new TurnStream(
      this.api,
      convId,
      {
        onTurn: (doc) => void this.onStreamTurn(doc),
        onStatus: (status) => this.showStatus(status),
      },
      this.options.stream ?? {},
    );
    this.stream.primeSeen(this.records.size);
    this.stream.start();
  }

  private storeRecord(record: TurnRecord): boolean {
    const turn = record.turn.value;
    if (this.records.has(turn)) return false;
    this.records.set(turn, record);
    return true;
  }

  private async onStreamTurn(doc: JObj): Promise<void> {
    const record = turnRecord(doc);
    if (record.conversation !== this.convId) return;
    if (!this.storeRecord(record)) return;
    if (record.user) this.chat.addUser(record.user);
    this.chat.addBot(record.response);
    await this.refreshSnapshot();
    this.renderTurnPanel();
    this.renderNodePanel();
  }

  async submit(text: string): Promise<void> {
    if (!this.convId) {
      this.chat.addInfo("create or pick a conversation first");
      return;
    }
    const convId = this.convId;
    this.chat.setBusy(true);
    try {
      const { doc } = await this.api.postTurn(convId, text);
      const record = turnRecord(doc);
      if (this.storeRecord(record)) {
        this.chat.addUser(record.user);
        this.chat.addBot(record.response);
      }
      await this.refreshSnapshot();
      this.renderTurnPanel();
      this.renderNodePanel();
      this.hideBanner();
    } catch (err) {
      this.handleError(err, () => void this.submit(text));
    } finally {
      this.chat.setBusy(false);
    }
  }

  private async refreshSnapshot(): Promise<void> {
    if (!this.convId) return;
    const { doc } = await this.api.wm(this.convId);
    this.snapshot = wmSnapshot(doc);
    this.renderGraph();
  }

  private renderGraph(): void {
    if (!this.snapshot) return;
    const tableHost = this.graphHost.querySelector("#graph-table-host") as HTMLElement;
    const canvas = this.graphHost.querySelector("#wm-canvas") as HTMLCanvasElement;
    if (this.snapshot.concepts.length > TABLE_FALLBACK_THRESHOLD) {
      canvas.classList.add("hidden");
      tableHost.classList.remove("hidden");
      tableHost.textContent = "";
      tableHost.appendChild(buildConceptTable(this.doc, this.snapshot));
      return;
    }
    canvas.classList.remove("hidden");
    tableHost.classList.add("hidden");
    this.graph?.setSnapshot(this.snapshot);
  }

  private latestRecord(): TurnRecord | null {
    const list = this.recordList();
    return list.length ? list[list.length - 1] : null;
  }

  private renderTurnPanel(): void {
    this.turnHost.textContent = "";
    this.turnHost.appendChild(
      renderTurnPanel(this.doc, this.latestRecord(), this.snapshot, {
        onCandidateHover: (dSet) => this.graph?.highlight(dSet ?? []),
        onConceptClick: (id) => {
          this.selectedNode = id;
          this.graph?.select(id);
          this.renderNodePanel();
        },
      }),
    );
  }

  private renderNodePanel(): void {
    this.nodeHost.textContent = "";
    if (this.selectedNode && this.snapshot) {
      this.nodeHost.appendChild(
        renderNodePanel(this.doc, this.snapshot, this.recordList(), this.selectedNode),
      );
    }
  }

  private showStatus(status: StreamStatus): void {
    this.statusBadge.dataset.status = status;
    this.statusBadge.textContent =
      status === "live" ? "live" : status === "polling" ? "polling" : "disconnected";
  }

  private showBanner(message: string, retry: (() => void) | null): void {
    this.retryAction = retry;
    this.banner.textContent = "";
    this.banner.classList.remove("hidden");
    this.banner.appendChild(
      Object.assign(this.doc.createElement("span"), { textContent: message }),
    );
    if (retry) {
      const btn = this.doc.createElement("button");
      btn.textContent = "Retry";
      btn.addEventListener("click", () => {
        const action = this.retryAction;
        this.hideBanner();
        action?.();
      });
      this.banner.appendChild(btn);
    }
  }

  private hideBanner(): void {
    this.banner.classList.add("hidden");
    this.banner.textContent = "";
    this.retryAction = null;
  }

  bannerText(): string | null {
    return this.banner.classList.contains("hidden") ? null : this.banner.textContent;
  }

  private handleError(err: unknown, retry: () => void): void {
    if (err instanceof ApiError) {
      if (err.status === 404) {
        // engine restarted or conversation deleted; the id is gone
        this.stream?.stop();
        this.convId = null;
        this.snapshot = null;
        this.chat.addInfo("conversation not found; it no longer exists on the server");
        this.showBanner("Conversation not found. Start a new one.", null);
        void this.guard(() => this.refreshConversationList(), null);
        return;
      }
      // engine errors go to the transcript verbatim
      this.chat.addInfo(err.detail);
      return;
    }
    this.showBanner("Connection lost.", retry);
  }

  private async guard(op: () => Promise<void>, retry: (() => void) | null): Promise<void> {
    try {
      await op();
      this.hideBanner();
    } catch (err) {
      if (retry) {
        this.handleError(err, retry);
      } else if (err instanceof ApiError) {
        this.chat.addInfo(err.detail);
      }
    }
  }
}
