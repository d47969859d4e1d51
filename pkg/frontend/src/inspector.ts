/**
 * Inspector panels: per-turn detail and per-node detail.
 *
 * Every number cell prints the lexeme captured from the server's JSON, so
 * the screen shows exactly what the record said; nothing is recomputed or
 * reformatted client-side.
 */

import { Candidate, ConceptRow, sameCandidate, TurnRecord, WmSnapshot } from "./types.js";

export interface TurnPanelHooks {
  onCandidateHover(dSet: string[] | null): void;
  onConceptClick(id: string): void;
}

function el(doc: Document, tag: string, className?: string, text?: string): HTMLElement {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function section(doc: Document, title: string): HTMLElement {
  const box = el(doc, "section", "panel-section");
  box.appendChild(el(doc, "h3", undefined, title));
  return box;
}

function conceptChipList(
  doc: Document,
  ids: string[],
  hooks: TurnPanelHooks,
  className: string,
): HTMLElement {
  const list = el(doc, "div", "chip-list");
  for (const id of ids) {
    const chip = el(doc, "button", `chip ${className}`, id);
    chip.addEventListener("click", () => hooks.onConceptClick(id));
    list.appendChild(chip);
  }
  if (!ids.length) list.appendChild(el(doc, "span", "muted", "none"));
  return list;
}

function isSelected(record: TurnRecord, cand: Candidate): boolean {
  const chosen = cand.kind === "reaction" ? record.selected.reaction : record.selected.presentation;
  return chosen !== null && sameCandidate(chosen, cand);
}

export function renderTurnPanel(
  doc: Document,
  record: TurnRecord | null,
  snapshot: WmSnapshot | null,
  hooks: TurnPanelHooks,
): HTMLElement {
  const root = el(doc, "div", "turn-panel");
  if (!record) {
    root.appendChild(el(doc, "p", "muted", "No turns yet. Say something."));
    return root;
  }

  const response = section(doc, `Turn ${record.turn.text}`);
  response.appendChild(el(doc, "p", "response-text", record.response || "(no response)"));
  if (record.parseMode !== "fixture") {
    response.appendChild(el(doc, "p", "muted", `parse mode: ${record.parseMode}`));
  }
  root.appendChild(response);

  const cands = section(doc, "Candidates");
  if (record.candidates.length) {
    const table = el(doc, "table", "candidate-table") as HTMLTableElement;
    table.innerHTML =
      "<thead><tr><th>rule</th><th>kind</th><th>priority</th><th>score</th>" +
      "<th>salience</th><th>picked</th></tr></thead>";
    const body = doc.createElement("tbody");
    for (const cand of record.candidates) {
      const row = doc.createElement("tr");
      row.className = "candidate-row";
      const picked = isSelected(record, cand);
      if (picked) row.classList.add("selected");
      const cells = [
        cand.rule,
        cand.kind,
        cand.priority ?? "mid",
        cand.score.text,
        cand.meanSalience.text,
        picked ? "✓" : "",
      ];
      for (const [i, cell] of cells.entries()) {
        const td = doc.createElement("td");
        td.textContent = cell;
        if (i === 3) td.className = "score-cell";
        if (i === 4) td.className = "salience-cell";
        row.appendChild(td);
      }
      row.addEventListener("mouseenter", () => hooks.onCandidateHover(cand.dSet));
      row.addEventListener("mouseleave", () => hooks.onCandidateHover(null));
      body.appendChild(row);
    }
    table.appendChild(body);
    cands.appendChild(table);
  } else {
    cands.appendChild(el(doc, "p", "muted", "no candidates this turn"));
  }
  root.appendChild(cands);

  const delta = section(doc, "Memory delta");
  const addedIds = [
    ...record.ingested,
    ...record.inferences.flatMap((f) => f.added),
  ];
  delta.appendChild(el(doc, "h4", undefined, "added"));
  delta.appendChild(conceptChipList(doc, addedIds, hooks, "chip-added"));
  delta.appendChild(el(doc, "h4", undefined, "pruned"));
  delta.appendChild(conceptChipList(doc, record.pruned, hooks, "chip-pruned"));
  root.appendChild(delta);

  if (record.contradictions.length) {
    const contra = section(doc, "Contradictions");
    for (const [a, b] of record.contradictions) {
      contra.appendChild(el(doc, "p", "contradiction", `${a} conflicts with ${b}`));
    }
    root.appendChild(contra);
  }

  if (record.warnings.length) {
    const warn = section(doc, "Warnings");
    for (const w of record.warnings) warn.appendChild(el(doc, "p", "warning", w));
    root.appendChild(warn);
  }

  if (snapshot) {
    const sal = section(doc, "Salience");
    const table = el(doc, "table", "salience-table");
    table.innerHTML = "<thead><tr><th>concept</th><th>salience</th></tr></thead>";
    const body = doc.createElement("tbody");
    const rows = [...snapshot.concepts].sort(
      (a, b) => b.salience.value - a.salience.value || (a.id < b.id ? -1 : 1),
    );
    for (const c of rows) {
      const row = doc.createElement("tr");
      const name = doc.createElement("td");
      const chip = el(doc, "button", "chip", c.id);
      chip.addEventListener("click", () => hooks.onConceptClick(c.id));
      name.appendChild(chip);
      const val = doc.createElement("td");
      val.className = "salience-cell";
      val.textContent = c.salience.text;
      row.appendChild(name);
      row.appendChild(val);
      body.appendChild(row);
    }
    table.appendChild(body);
    sal.appendChild(table);
    root.appendChild(sal);
  }

  return root;
}

/** Rules whose firing or candidacy involved the concept, per the records. */
export function rulesTouching(records: TurnRecord[], id: string): string[] {
  const out = new Set<string>();
  for (const record of records) {
    for (const f of record.inferences) {
      if (f.added.includes(id)) out.add(`${f.rule} (inferred it)`);
    }
    for (const cand of record.candidates) {
      const touched =
        cand.dSet.includes(id) || Object.values(cand.bindings).includes(id);
      if (touched) out.add(`${cand.rule} (${cand.kind} candidate)`);
    }
  }
  return [...out].sort();
}

export function renderNodePanel(
  doc: Document,
  snapshot: WmSnapshot,
  records: TurnRecord[],
  id: string,
): HTMLElement {
  const root = el(doc, "div", "node-panel");
  const concept: ConceptRow | undefined = snapshot.concepts.find((c) => c.id === id);
  root.appendChild(el(doc, "h3", undefined, id));
  if (!concept) {
    root.appendChild(el(doc, "p", "muted", "not in working memory"));
    return root;
  }

  const types = section(doc, "Types");
  types.appendChild(
    el(doc, "p", undefined, concept.types.length ? concept.types.join(", ") : "(untyped)"),
  );
  root.appendChild(types);

  const feats = section(doc, "Features");
  const table = el(doc, "table", "feature-table");
  const body = doc.createElement("tbody");
  const pred = snapshot.predicates.find((p) => p.id === id);
  const rows: [string, string][] = [
    ["salience", concept.salience.text],
    ["truth", concept.truth],
    ["pinned", String(concept.pinned)],
    ["covered", String(concept.covered)],
    ["tense", concept.tense ?? "(none)"],
    ["last mention", concept.lastMention.text],
  ];
  if (concept.surface) rows.push(["surface", concept.surface]);
  if (pred) {
    rows.push(["ptype", pred.ptype ?? "(none)"]);
    rows.push(["arguments", pred.object ? `${pred.subject}, ${pred.object}` : pred.subject]);
  }
  for (const [key, value] of rows) {
    const row = doc.createElement("tr");
    row.appendChild(el(doc, "th", undefined, key));
    const td = doc.createElement("td");
    td.textContent = value;
    if (key === "salience") td.className = "salience-cell";
    row.appendChild(td);
    body.appendChild(row);
  }
  table.appendChild(body);
  feats.appendChild(table);
  root.appendChild(feats);

  const touched = section(doc, "Touched by");
  const rules = rulesTouching(records, id);
  if (rules.length) {
    const list = doc.createElement("ul");
    for (const r of rules) list.appendChild(el(doc, "li", undefined, r));
    touched.appendChild(list);
  } else {
    touched.appendChild(el(doc, "p", "muted", "no recorded rule involvement"));
  }
  root.appendChild(touched);
  return root;
}
