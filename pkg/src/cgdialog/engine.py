"""The conversation engine: one deterministic pipeline per turn.

Every turn runs ingest, retrieve, infer, resolve, respond, decay, propagate,
prune, in that order, against one conversation's working memory. The whole
turn is all-or-nothing: state is snapshotted first and restored if any stage
raises, so a failed turn leaves the conversation exactly as it was.

Determinism: ids come from a per-conversation mint, iteration follows sorted
or insertion order everywhere, and turn records exclude wall-clock timing
from their canonical form, so replaying a record log through a fresh engine
reproduces it byte for byte.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .compiler import IdMint
from .errors import EmptyResponse, EngineError, NoCandidate, ParseFixtureMissing
from .graph import ConceptGraph
from .inference import apply_rules, instantiate, rewrite_fired_keys
from .memory import WorkingMemory
from .nlu import analyze, naive_parse
from .pack import ContentPack
from .realizer import compose, realization_graph, render, select_template
from .responses import identify_candidates, select_compound


@dataclass
class EngineConfig:
    workers: int = 4
    inference_passes: int = 2
    naive_parse: bool = False
    log_dir: str | None = None


def canonical_record(record: dict) -> dict:
    """The replay-stable view of a record: everything except timing."""
    return {k: v for k, v in record.items() if k != "timing"}


def record_line(record: dict) -> str:
    return json.dumps(canonical_record(record), sort_keys=True, ensure_ascii=True)


class Conversation:
    def __init__(self, conv_id: str, pack: ContentPack, seed: str | None):
        self.id = conv_id
        self.seed = seed
        self.wm = WorkingMemory(pack.kb, pack.salience, pack.pinned)
        self.mint = IdMint(set(pack.kb.features) | {"_"})
        self.fired_inference: set = set()
        self.fired_responses: set = set()
        self.records: list[dict] = []
        self.last_candidates: list[dict] = []
        self.lock = threading.Lock()
        self.listeners: list = []
        if seed is not None:
            seed_graph = pack.seeds[seed].copy()
            for feats in seed_graph.features.values():
                feats.salience = pack.salience.mention
                feats.last_mention = 0
            self.wm.graph.absorb(seed_graph)
            self.wm.import_kb_types(sorted(seed_graph.features))

    # -- all-or-nothing turn state ------------------------------------------

    def _snapshot(self) -> tuple:
        return (self.wm.graph.copy(), self.wm.turn,
                set(self.fired_inference), set(self.fired_responses),
                dict(self.mint.counts), set(self.mint.taken))

    def _restore(self, snap: tuple) -> None:
        graph, turn, fi, fr, counts, taken = snap
        self.wm.graph = graph
        self.wm.turn = turn
        self.fired_inference = fi
        self.fired_responses = fr
        self.mint.counts = counts
        self.mint.taken = taken


class Engine:
    def __init__(self, pack: ContentPack, config: EngineConfig | None = None):
        self.pack = pack
        self.config = config or EngineConfig()
        self.conversations: dict[str, Conversation] = {}
        self._create_lock = threading.Lock()
        self._counter = 0

    # -- conversation lifecycle ----------------------------------------------

    def create_conversation(self, seed: str | None = None,
                            conversation_id: str | None = None) -> Conversation:
        if seed is not None and seed not in self.pack.seeds:
            raise EngineError(f"unknown seed {seed!r}")
        with self._create_lock:
            if conversation_id is None:
                self._counter += 1
                conversation_id = f"conv_{self._counter}"
            if conversation_id in self.conversations:
                raise EngineError(f"conversation {conversation_id!r} already exists")
            conv = Conversation(conversation_id, self.pack, seed)
            self.conversations[conversation_id] = conv
        self._log(conv, {"event": "conversation", "id": conv.id, "seed": seed})
        return conv

    def delete_conversation(self, conv_id: str) -> None:
        conv = self.get(conv_id)
        with conv.lock:
            del self.conversations[conv_id]
        for listener in conv.listeners:
            listener.put(None)

    def get(self, conv_id: str) -> Conversation:
        conv = self.conversations.get(conv_id)
        if conv is None:
            raise KeyError(conv_id)
        return conv

    # -- the turn pipeline -----------------------------------------------------

    def process_turn(self, conv_id: str, text: str) -> dict:
        conv = self.get(conv_id)
        with conv.lock:
            snap = conv._snapshot()
            try:
                record = self._run_turn(conv, text)
            except Exception:
                conv._restore(snap)
                raise
        conv.records.append(record)
        self._log(conv, record)
        for listener in conv.listeners:
            listener.put(record)
        return record

    def _run_turn(self, conv: Conversation, text: str) -> dict:
        pack, config = self.pack, self.config
        wm, mint = conv.wm, conv.mint.fresh
        warnings: list[str] = []
        timing: dict[str, float] = {}
        clock = time.perf_counter

        def stage(name: str, started: float) -> float:
            now = clock()
            timing[name] = round((now - started) * 1000.0, 3)
            return now

        wm.turn += 1
        t = clock()

        # parse
        parse_mode = "empty"
        span_report: list[dict] = []
        utterance: ConceptGraph | None = None
        if text:
            fixture = pack.fixtures.get(text)
            if fixture is not None:
                utterance, span_map = analyze(
                    fixture, kb=pack.kb, lexicon=pack.lexicon,
                    rules=pack.rules, mint=mint, canonical=pack.canonical,
                    skip_tags=pack.skip_tags, warnings=warnings)
                parse_mode = "fixture"
            elif config.naive_parse:
                utterance, span_map = naive_parse(
                    text, pack.lexicon, pack.kb, mint, pack.canonical)
                parse_mode = "naive"
            else:
                raise ParseFixtureMissing(
                    f"no parse fixture for {text!r}; rerun with naive parsing "
                    "enabled or add a fixture")
            span_report = span_map.describe()
        t = stage("parse", t)

        added = wm.ingest_turn(utterance) if utterance is not None else []
        t = stage("ingest", t)

        retrieved = wm.retrieve_knowledge()
        t = stage("retrieve", t)

        inference_rules = [r for r in pack.rules if r.kind == "inference"]
        firings = apply_rules(inference_rules, wm.graph, mint,
                              conv.fired_inference,
                              passes=config.inference_passes,
                              workers=config.workers)
        inferred = sorted({c for f in firings for c in f.added})
        wm.import_kb_types(inferred)
        t = stage("infer", t)

        resolutions = wm.resolve_references()
        for resolution in resolutions:
            rewrite_fired_keys(conv.fired_inference, resolution.merges)
            rewrite_fired_keys(conv.fired_responses, resolution.merges)
        t = stage("resolve", t)

        candidates = identify_candidates(pack.rules, wm, conv.fired_responses,
                                         workers=config.workers)
        reaction, presentation = select_compound(candidates, wm, conv.fired_responses)
        segments: list[str | None] = []
        selected: dict[str, dict | None] = {"reaction": None, "presentation": None}
        for slot, cand in (("reaction", reaction), ("presentation", presentation)):
            if cand is None:
                segments.append(None)
                continue
            core = set(cand.d_set) | set(cand.solution.as_dict().values())
            if cand.rule.post is not None:
                delta, _ = instantiate(cand.rule.post, cand.solution.as_dict(), mint)
                wm.graph.absorb(delta)
                wm.import_kb_types(sorted(delta.features))
                core |= set(delta.features)
            wm.mark_verbalized(sorted(core))
            rgraph = realization_graph(wm.graph, core)
            choice = select_template(pack.templates, cand.rule.name, rgraph)
            if choice is None:
                warnings.append(f"no template matched rule {cand.rule.name!r}")
                segments.append(None)
            else:
                segments.append(render(choice[0], choice[1], rgraph, warnings))
            selected[slot] = cand.describe()
        try:
            if reaction is None and presentation is None:
                raise NoCandidate("no response rule produced a candidate")
            response_text = compose(segments[0], segments[1])
        except (NoCandidate, EmptyResponse) as exc:
            warnings.append(str(exc))
            response_text = ""
        t = stage("respond", t)

        wm.update_salience()
        t = stage("salience", t)

        pruned = wm.prune()
        contradictions = wm.detect_contradictions()
        stage("prune", t)

        conv.last_candidates = [c.describe() for c in candidates]
        record = {
            "event": "turn",
            "conversation": conv.id,
            "turn": wm.turn,
            "user": text,
            "response": response_text,
            "parse": {"mode": parse_mode, "productions": span_report},
            "ingested": added,
            "retrieved": retrieved,
            "inferences": [{"rule": f.rule,
                            "bindings": f.solution.as_dict(),
                            "added": list(f.added)} for f in firings],
            "resolutions": [{"focus": r.focus, "referent": r.referent,
                             "merges": r.merges} for r in resolutions],
            "candidates": conv.last_candidates,
            "selected": selected,
            "pruned": pruned,
            "contradictions": [list(pair) for pair in contradictions],
            "warnings": warnings,
            "wm_size": len(wm.graph.features),
            "timing": timing,
        }
        return record

    # -- inspection and logging --------------------------------------------------

    def snapshot(self, conv_id: str) -> dict:
        conv = self.get(conv_id)
        with conv.lock:
            return conv.wm.snapshot()

    def _log(self, conv: Conversation, record: dict) -> None:
        if not self.config.log_dir:
            return
        log_dir = Path(self.config.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        line = json.dumps(record, sort_keys=True, ensure_ascii=True)
        with open(log_dir / f"{conv.id}.jsonl", "a") as fh:
            fh.write(line + "\n")


def replay_log(pack: ContentPack, lines: list[str],
               config: EngineConfig | None = None) -> tuple[bool, list[str]]:
    """Re-run a record log through a fresh engine and compare canonically.

    Returns (matched, mismatch descriptions). The log must start with the
    conversation header written at creation time.
    """
    engine = Engine(pack, config or EngineConfig())
    mismatches: list[str] = []
    conv_map: dict[str, str] = {}
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        old = json.loads(line)
        if old.get("event") == "conversation":
            conv = engine.create_conversation(seed=old.get("seed"))
            conv_map[old["id"]] = conv.id
            continue
        conv_id = conv_map.get(old.get("conversation", ""))
        if conv_id is None:
            mismatches.append(f"line {n}: turn for unknown conversation")
            continue
        new = engine.process_turn(conv_id, old["user"])
        new = dict(new, conversation=old["conversation"])
        if record_line(new) != record_line(old):
            mismatches.append(f"line {n}: replayed record differs")
    return (not mismatches, mismatches)


def run_script(engine: Engine, script) -> list[dict]:
    """Drive a golden conversation script; raises on the first divergence."""
    conv = engine.create_conversation(seed=script.seed)
    transcript = []
    for user_text, expected in script.turns():
        record = engine.process_turn(conv.id, user_text)
        transcript.append(record)
        if expected is not None and record["response"] != expected:
            raise AssertionError(
                f"golden {script.name!r} turn {record['turn']}: expected "
                f"{expected!r}, got {record['response']!r}")
    return transcript
