/**
 * Typed views over the engine's JSON payloads.
 *
 * Each view wraps a lexeme-preserving document (see jsontext.ts) instead of
 * copying it into plain interfaces, so the original number spellings stay
 * reachable for display. Accessors throw on shape drift.
 */

import { asArr, asObj, asStr, asStrOrNull, field, JNum, JObj, Json } from "./jsontext.js";

export interface PackInfo {
  name: string;
  concepts: JNum;
  rules: string[];
  templates: string[];
  seeds: string[];
}

export function packInfo(doc: Json): PackInfo {
  const o = asObj(doc, "pack");
  return {
    name: field.str(o, "name"),
    concepts: field.num(o, "concepts"),
    rules: field.arr(o, "rules").map((r) => asStr(r)),
    templates: field.arr(o, "templates").map((t) => asStr(t)),
    seeds: field.arr(o, "seeds").map((s) => asStr(s)),
  };
}

export interface ConversationInfo {
  id: string;
  seed: string | null;
  turns: JNum;
  wmSize: JNum;
}

export function conversationInfo(doc: Json): ConversationInfo {
  const o = asObj(doc, "conversation");
  return {
    id: field.str(o, "id"),
    seed: asStrOrNull(o.seed ?? null),
    turns: field.num(o, "turns"),
    wmSize: field.num(o, "wm_size"),
  };
}

export interface Candidate {
  rule: string;
  kind: string;
  priority: string | null;
  bindings: Record<string, string>;
  dSet: string[];
  meanSalience: JNum;
  score: JNum;
}

export function candidate(doc: Json): Candidate {
  const o = asObj(doc, "candidate");
  const bindings: Record<string, string> = {};
  for (const [k, v] of Object.entries(field.obj(o, "bindings"))) {
    bindings[k] = asStr(v, `binding ${k}`);
  }
  return {
    rule: field.str(o, "rule"),
    kind: field.str(o, "kind"),
    priority: asStrOrNull(o.priority ?? null),
    bindings,
    dSet: field.arr(o, "d_set").map((c) => asStr(c)),
    meanSalience: field.num(o, "mean_salience"),
    score: field.num(o, "score"),
  };
}

export interface TurnRecord {
  turn: JNum;
  conversation: string;
  user: string;
  response: string;
  parseMode: string;
  ingested: string[];
  retrieved: string[];
  inferences: { rule: string; added: string[] }[];
  resolutions: { focus: string; referent: string }[];
  candidates: Candidate[];
  selected: { reaction: Candidate | null; presentation: Candidate | null };
  pruned: string[];
  contradictions: [string, string][];
  warnings: string[];
  wmSize: JNum;
  raw: JObj;
}

function optCandidate(v: Json): Candidate | null {
  return v === null ? null : candidate(v);
}

export function turnRecord(doc: Json): TurnRecord {
  const o = asObj(doc, "turn record");
  const selected = field.obj(o, "selected");
  return {
    turn: field.num(o, "turn"),
    conversation: field.str(o, "conversation"),
    user: field.str(o, "user"),
    response: field.str(o, "response"),
    parseMode: asStr(field.obj(o, "parse").mode ?? null, "parse.mode"),
    ingested: field.arr(o, "ingested").map((c) => asStr(c)),
    retrieved: field.arr(o, "retrieved").map((c) => asStr(c)),
    inferences: field.arr(o, "inferences").map((f) => {
      const fo = asObj(f, "inference");
      return {
        rule: field.str(fo, "rule"),
        added: field.arr(fo, "added").map((c) => asStr(c)),
      };
    }),
    resolutions: field.arr(o, "resolutions").map((r) => {
      const ro = asObj(r, "resolution");
      return { focus: field.str(ro, "focus"), referent: field.str(ro, "referent") };
    }),
    candidates: field.arr(o, "candidates").map(candidate),
    selected: {
      reaction: optCandidate(selected.reaction ?? null),
      presentation: optCandidate(selected.presentation ?? null),
    },
    pruned: field.arr(o, "pruned").map((c) => asStr(c)),
    contradictions: field.arr(o, "contradictions").map((pair) => {
      const p = asArr(pair, "contradiction").map((c) => asStr(c));
      return [p[0], p[1]] as [string, string];
    }),
    warnings: field.arr(o, "warnings").map((w) => asStr(w)),
    wmSize: field.num(o, "wm_size"),
    raw: o,
  };
}

export interface ConceptRow {
  id: string;
  surface: string | null;
  salience: JNum;
  truth: string;
  pinned: boolean;
  covered: boolean;
  tense: string | null;
  lastMention: JNum;
  types: string[];
}

export interface PredicateRow {
  id: string;
  ptype: string | null;
  subject: string;
  object: string | null;
  truth: string;
  salience: JNum;
}

export interface EdgeRow {
  source: string;
  target: string;
  label: string;
}

export interface WmSnapshot {
  turn: JNum;
  concepts: ConceptRow[];
  predicates: PredicateRow[];
  edges: EdgeRow[];
}

export function wmSnapshot(doc: Json): WmSnapshot {
  const o = asObj(doc, "wm snapshot");
  return {
    turn: field.num(o, "turn"),
    concepts: field.arr(o, "concepts").map((c) => {
      const co = asObj(c, "concept");
      return {
        id: field.str(co, "id"),
        surface: asStrOrNull(co.surface ?? null),
        salience: field.num(co, "salience"),
        truth: field.str(co, "truth"),
        pinned: co.pinned === true,
        covered: co.covered === true,
        tense: asStrOrNull(co.tense ?? null),
        lastMention: field.num(co, "last_mention"),
        types: field.arr(co, "types").map((t) => asStr(t)),
      };
    }),
    predicates: field.arr(o, "predicates").map((p) => {
      const po = asObj(p, "predicate");
      return {
        id: field.str(po, "id"),
        ptype: asStrOrNull(po.ptype ?? null),
        subject: field.str(po, "subject"),
        object: asStrOrNull(po.object ?? null),
        truth: field.str(po, "truth"),
        salience: field.num(po, "salience"),
      };
    }),
    edges: field.arr(o, "edges").map((e) => {
      const eo = asObj(e, "edge");
      return {
        source: field.str(eo, "source"),
        target: field.str(eo, "target"),
        label: field.str(eo, "label"),
      };
    }),
  };
}

/** Candidates are equal when rule and bindings agree; used for the selected flag. */
export function sameCandidate(a: Candidate, b: Candidate): boolean {
  if (a.rule !== b.rule || a.kind !== b.kind) return false;
  const ak = Object.keys(a.bindings).sort();
  const bk = Object.keys(b.bindings).sort();
  if (ak.length !== bk.length) return false;
  return ak.every((k, i) => k === bk[i] && a.bindings[k] === b.bindings[k]);
}
