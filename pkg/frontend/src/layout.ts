/**
 * Small force-directed layout for the memory graph.
 *
 * Deterministic on purpose: initial positions hash off the node id and the
 * integrator has no randomness, so the same snapshot always settles into
 * the same picture and tests can assert on coordinates. Pairwise repulsion
 * is quadratic, which is fine at the inspector's scale; beyond 500 nodes
 * the view switches to a table before layout cost matters.
 */

export interface LayoutNode {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  /** pinned by a drag; forces leave it alone */
  fixed: boolean;
}

export interface LayoutEdge {
  source: number;
  target: number;
}

const REPULSION = 2600;
const SPRING = 0.06;
const REST_LENGTH = 70;
const CENTER_PULL = 0.012;
const DAMPING = 0.82;
const ALPHA_DECAY = 0.985;
const MIN_ALPHA = 0.02;

export function hashAngle(id: string): number {
  let h = 2166136261;
  for (let i = 0; i < id.length; i++) {
    h ^= id.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return ((h >>> 0) / 4294967296) * Math.PI * 2;
}

export class ForceLayout {
  readonly nodes: LayoutNode[] = [];
  private readonly index = new Map<string, number>();
  private edges: LayoutEdge[] = [];
  alpha = 1;

  constructor(
    private readonly width: number,
    private readonly height: number,
  ) {}

  /**
   * Reconcile with a new node/edge set. Existing nodes keep their position,
   * new nodes enter on a ring around the center offset by their id hash so
   * re-layouts of the same snapshot are identical.
   */
  setGraph(ids: string[], edges: { source: string; target: string }[]): void {
    const keep = new Set(ids);
    for (let i = this.nodes.length - 1; i >= 0; i--) {
      if (!keep.has(this.nodes[i].id)) this.nodes.splice(i, 1);
    }
    this.index.clear();
    this.nodes.forEach((n, i) => this.index.set(n.id, i));
    const ring = Math.min(this.width, this.height) * 0.33;
    for (const id of ids) {
      if (this.index.has(id)) continue;
      const angle = hashAngle(id);
      this.index.set(id, this.nodes.length);
      this.nodes.push({
        id,
        x: this.width / 2 + Math.cos(angle) * ring,
        y: this.height / 2 + Math.sin(angle) * ring,
        vx: 0,
        vy: 0,
        fixed: false,
      });
    }
    this.edges = [];
    for (const e of edges) {
      const s = this.index.get(e.source);
      const t = this.index.get(e.target);
      if (s !== undefined && t !== undefined && s !== t) {
        this.edges.push({ source: s, target: t });
      }
    }
    this.alpha = 1;
  }

  positionOf(id: string): LayoutNode | undefined {
    const i = this.index.get(id);
    return i === undefined ? undefined : this.nodes[i];
  }

  pin(id: string, x: number, y: number): void {
    const n = this.positionOf(id);
    if (n) {
      n.fixed = true;
      n.x = x;
      n.y = y;
      n.vx = 0;
      n.vy = 0;
      this.alpha = Math.max(this.alpha, 0.3);
    }
  }

  release(id: string): void {
    const n = this.positionOf(id);
    if (n) {
      n.fixed = false;
      // let the graph relax around the freed node
      this.alpha = Math.max(this.alpha, 0.3);
    }
  }

  get settled(): boolean {
    return this.alpha <= MIN_ALPHA;
  }

  step(iterations = 1): void {
    for (let it = 0; it < iterations; it++) {
      if (this.settled) return;
      const nodes = this.nodes;
      const a = this.alpha;

      for (let i = 0; i < nodes.length; i++) {
        for (let j = i + 1; j < nodes.length; j++) {
          let dx = nodes[j].x - nodes[i].x;
          let dy = nodes[j].y - nodes[i].y;
          let d2 = dx * dx + dy * dy;
          if (d2 < 1) {
            // coincident nodes get a deterministic nudge apart
            dx = 0.5;
            dy = 0.5;
            d2 = 0.5;
          }
          const f = (REPULSION * a) / d2;
          const d = Math.sqrt(d2);
          const fx = (dx / d) * f;
          const fy = (dy / d) * f;
          nodes[i].vx -= fx;
          nodes[i].vy -= fy;
          nodes[j].vx += fx;
          nodes[j].vy += fy;
        }
      }

      for (const e of this.edges) {
        const s = nodes[e.source];
        const t = nodes[e.target];
        const dx = t.x - s.x;
        const dy = t.y - s.y;
        const d = Math.sqrt(dx * dx + dy * dy) || 1;
        const f = SPRING * a * (d - REST_LENGTH);
        const fx = (dx / d) * f;
        const fy = (dy / d) * f;
        s.vx += fx;
        s.vy += fy;
        t.vx -= fx;
        t.vy -= fy;
      }

      const cx = this.width / 2;
      const cy = this.height / 2;
      for (const n of nodes) {
        if (n.fixed) continue;
        n.vx += (cx - n.x) * CENTER_PULL * a;
        n.vy += (cy - n.y) * CENTER_PULL * a;
        n.vx *= DAMPING;
        n.vy *= DAMPING;
        n.x += n.vx;
        n.y += n.vy;
      }

      this.alpha *= ALPHA_DECAY;
    }
  }

  /** Run until settled; layout for tests and one-shot rendering. */
  settle(maxSteps = 600): void {
    let guard = maxSteps;
    while (!this.settled && guard-- > 0) this.step();
  }
}
