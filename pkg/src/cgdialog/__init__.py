"""Concept-graph dialogue engine.

A dialogue system where understanding, memory, inference, and response
selection all operate on one typed predicate graph. See the README for the
source language, the content pack layout, and the HTTP interface.
"""

from .compiler import CompileResult, Rule, compile_pattern, compile_text, compile_units, serialize
from .engine import Engine, EngineConfig, canonical_record, replay_log, run_script
from .errors import CGDialogError, CompileError, EngineError
from .graph import ConceptGraph, FeatureSet
from .inference import apply_rules, instantiate
from .matcher import QueryGraph, Solution, brute_force_oracle, match, match_all
from .memory import SalienceConfig, WorkingMemory
from .pack import ContentPack, load_pack, validate_pack

__version__ = "0.1.0"

__all__ = [
    "CGDialogError", "CompileError", "CompileResult", "ConceptGraph",
    "ContentPack", "Engine", "EngineConfig", "EngineError", "FeatureSet",
    "QueryGraph", "Rule", "SalienceConfig", "Solution", "WorkingMemory",
    "apply_rules", "brute_force_oracle", "canonical_record",
    "compile_pattern", "compile_text", "compile_units", "instantiate",
    "load_pack", "match", "match_all", "replay_log", "run_script",
    "serialize", "validate_pack", "__version__",
]
