/**
 * Working-memory graph on a canvas.
 *
 * Concepts are circles sized and tinted by salience on an absolute scale,
 * so equal saliences read as equal sizes. Predicate instances are squares
 * joined to their arguments by labeled ARG0/ARG1 edges; type edges are
 * dotted. Negative-truth predicates draw dashed and red. Nodes pruned by
 * the last turn linger briefly and fade out. Past 500 nodes the canvas
 * yields to a plain table.
 */

import { ForceLayout } from "./layout.js";
import { WmSnapshot } from "./types.js";

export const TABLE_FALLBACK_THRESHOLD = 500;
const FADE_MS = 900;
const MIN_RADIUS = 5;
const MAX_RADIUS = 13;

export interface NodeInfo {
  id: string;
  kind: "concept" | "predicate";
  salience: number;
  truth: string;
  pinned: boolean;
}

export interface GraphCallbacks {
  onSelect(id: string | null): void;
}

export function radiusFor(salience: number): number {
  const s = Math.max(0, Math.min(1, salience));
  return MIN_RADIUS + (MAX_RADIUS - MIN_RADIUS) * s;
}

export function fillFor(salience: number, truth: string): string {
  if (truth === "negative") return "#8c2f39";
  const s = Math.max(0, Math.min(1, salience));
  const warm = Math.round(120 + 110 * s);
  const cool = Math.round(150 - 70 * s);
  return `rgb(${warm}, ${Math.round(120 + 20 * s)}, ${cool})`;
}

export function fadeAlpha(ageMs: number): number {
  return Math.max(0, 1 - ageMs / FADE_MS);
}

interface FadingNode {
  info: NodeInfo;
  x: number;
  y: number;
  since: number;
}

export class GraphView {
  private readonly layout: ForceLayout;
  private readonly ctx: CanvasRenderingContext2D | null;
  private nodes = new Map<string, NodeInfo>();
  private edges: { source: string; target: string; label: string }[] = [];
  private fading: FadingNode[] = [];
  private highlighted = new Set<string>();
  private selected: string | null = null;
  private dragging: string | null = null;
  private raf = 0;
  private disposed = false;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly callbacks: GraphCallbacks,
    private readonly now: () => number = () => performance.now(),
  ) {
    this.layout = new ForceLayout(canvas.width, canvas.height);
    this.ctx = canvas.getContext("2d");
    canvas.addEventListener("mousedown", (ev) => this.onMouseDown(ev));
    canvas.addEventListener("mousemove", (ev) => this.onMouseMove(ev));
    canvas.addEventListener("mouseup", () => this.onMouseUp());
    canvas.addEventListener("mouseleave", () => this.onMouseUp());
  }

  get nodeCount(): number {
    return this.nodes.size;
  }

  setSnapshot(snap: WmSnapshot): void {
    const next = new Map<string, NodeInfo>();
    const isPredicate = new Set(snap.predicates.map((p) => p.id));
    for (const c of snap.concepts) {
      next.set(c.id, {
        id: c.id,
        kind: isPredicate.has(c.id) ? "predicate" : "concept",
        salience: c.salience.value,
        truth: c.truth,
        pinned: c.pinned,
      });
    }
    // nodes that vanished start their fade-out at their last position
    const stamp = this.now();
    for (const [id, info] of this.nodes) {
      if (!next.has(id)) {
        const pos = this.layout.positionOf(id);
        if (pos) this.fading.push({ info, x: pos.x, y: pos.y, since: stamp });
      }
    }
    this.nodes = next;
    this.edges = snap.edges.map((e) => ({ ...e }));
    this.layout.setGraph(
      [...next.keys()],
      this.edges.filter((e) => next.has(e.source) && next.has(e.target)),
    );
    if (this.selected && !next.has(this.selected)) {
      this.selected = null;
      this.callbacks.onSelect(null);
    }
    this.schedule();
  }

  highlight(ids: Iterable<string>): void {
    this.highlighted = new Set(ids);
    this.schedule();
  }

  select(id: string | null): void {
    this.selected = id;
    this.schedule();
  }

  dispose(): void {
    this.disposed = true;
    if (this.raf) cancelAnimationFrame(this.raf);
  }

  hitTest(x: number, y: number): string | null {
    let best: string | null = null;
    let bestD = Infinity;
    for (const [id, info] of this.nodes) {
      const pos = this.layout.positionOf(id);
      if (!pos) continue;
      const r = radiusFor(info.salience) + 4;
      const d = (pos.x - x) ** 2 + (pos.y - y) ** 2;
      if (d <= r * r && d < bestD) {
        best = id;
        bestD = d;
      }
    }
    return best;
  }

  private canvasPoint(ev: MouseEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    const sx = rect.width ? this.canvas.width / rect.width : 1;
    const sy = rect.height ? this.canvas.height / rect.height : 1;
    return { x: (ev.clientX - rect.left) * sx, y: (ev.clientY - rect.top) * sy };
  }

  private onMouseDown(ev: MouseEvent): void {
    const { x, y } = this.canvasPoint(ev);
    const hit = this.hitTest(x, y);
    this.selected = hit;
    this.callbacks.onSelect(hit);
    if (hit) {
      this.dragging = hit;
      this.layout.pin(hit, x, y);
    }
    this.schedule();
  }

  private onMouseMove(ev: MouseEvent): void {
    if (!this.dragging) return;
    const { x, y } = this.canvasPoint(ev);
    this.layout.pin(this.dragging, x, y);
    this.schedule();
  }

  private onMouseUp(): void {
    if (this.dragging) {
      this.layout.release(this.dragging);
      this.dragging = null;
    }
  }

  private schedule(): void {
    if (this.disposed || this.raf || !this.ctx) return;
    if (typeof requestAnimationFrame !== "function") return;
    this.raf = requestAnimationFrame(() => {
      this.raf = 0;
      this.tick();
    });
  }

  private tick(): void {
    this.layout.step(3);
    this.draw();
    const fadingActive = this.fading.length > 0;
    if (!this.layout.settled || fadingActive) this.schedule();
  }

  draw(): void {
    const ctx = this.ctx;
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    const stamp = this.now();

    for (const e of this.edges) {
      const s = this.layout.positionOf(e.source);
      const t = this.layout.positionOf(e.target);
      if (!s || !t) continue;
      const lit = this.highlighted.has(e.source) || this.highlighted.has(e.target);
      ctx.beginPath();
      ctx.moveTo(s.x, s.y);
      ctx.lineTo(t.x, t.y);
      if (e.label === "T") {
        ctx.setLineDash([2, 4]);
        ctx.strokeStyle = lit ? "#9b8f6b" : "#555b66";
        ctx.lineWidth = 1;
      } else {
        ctx.setLineDash([]);
        ctx.strokeStyle = lit ? "#e0b450" : "#7a8190";
        ctx.lineWidth = lit ? 2 : 1.2;
      }
      ctx.stroke();
      ctx.setLineDash([]);
      if (e.label !== "T") {
        ctx.fillStyle = "#9aa2b1";
        ctx.font = "9px sans-serif";
        ctx.fillText(e.label, (s.x + t.x) / 2 + 3, (s.y + t.y) / 2 - 3);
      }
    }

    for (let i = this.fading.length - 1; i >= 0; i--) {
      const f = this.fading[i];
      const alpha = fadeAlpha(stamp - f.since);
      if (alpha <= 0) {
        this.fading.splice(i, 1);
        continue;
      }
      ctx.globalAlpha = alpha;
      this.drawNode(ctx, f.info, f.x, f.y);
      ctx.globalAlpha = 1;
    }

    for (const [id, info] of this.nodes) {
      const pos = this.layout.positionOf(id);
      if (pos) this.drawNode(ctx, info, pos.x, pos.y);
    }
  }

  private drawNode(ctx: CanvasRenderingContext2D, info: NodeInfo, x: number, y: number): void {
    const r = radiusFor(info.salience);
    const negative = info.truth === "negative";
    ctx.beginPath();
    if (info.kind === "predicate") {
      ctx.rect(x - r, y - r, r * 2, r * 2);
    } else {
      ctx.arc(x, y, r, 0, Math.PI * 2);
    }
    ctx.fillStyle = fillFor(info.salience, info.truth);
    ctx.fill();
    ctx.setLineDash(negative ? [3, 3] : []);
    ctx.lineWidth = info.id === this.selected ? 3 : this.highlighted.has(info.id) ? 2.5 : 1;
    ctx.strokeStyle =
      info.id === this.selected ? "#ffffff"
      : this.highlighted.has(info.id) ? "#e0b450"
      : negative ? "#ff6b6b"
      : "#2b303a";
    ctx.stroke();
    ctx.setLineDash([]);
    if (info.pinned) {
      ctx.beginPath();
      ctx.arc(x, y, r + 3, 0, Math.PI * 2);
      ctx.strokeStyle = "#8fd0ff";
      ctx.lineWidth = 1;
      ctx.stroke();
    }
    ctx.fillStyle = "#d7dce5";
    ctx.font = "10px sans-serif";
    ctx.fillText(info.id, x + r + 3, y + 3);
  }
}

/** Table stand-in for oversized snapshots. */
export function buildConceptTable(doc: Document, snap: WmSnapshot): HTMLElement {
  const wrap = doc.createElement("div");
  wrap.className = "graph-table";
  const note = doc.createElement("p");
  note.className = "muted";
  note.textContent =
    `${snap.concepts.length} concepts exceed the ${TABLE_FALLBACK_THRESHOLD}-node ` +
    "graph limit; showing the table view.";
  wrap.appendChild(note);
  const table = doc.createElement("table");
  table.innerHTML =
    "<thead><tr><th>concept</th><th>salience</th><th>truth</th><th>types</th></tr></thead>";
  const body = doc.createElement("tbody");
  for (const c of snap.concepts) {
    const row = doc.createElement("tr");
    for (const cell of [c.id, c.salience.text, c.truth, c.types.join(", ")]) {
      const td = doc.createElement("td");
      td.textContent = cell;
      row.appendChild(td);
    }
    body.appendChild(row);
  }
  table.appendChild(body);
  wrap.appendChild(table);
  return wrap;
}
