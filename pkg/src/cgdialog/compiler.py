"""Compiler for the knowledge language.

Source text is a sequence of declarations and rule blocks. Declarations build
concept-graph knowledge:

    fido/dog()                      named instance of a type
    w1/wag(fido, t1)                named predicate instance
    like(user, avengers)            anonymous predicate instance
    type(movie, item)               direct ontology edge, no instance
    not(e)                          flips the truth class of e
    time(w, past)                   time predicate plus a tense feature on w
    c/()                            bare concept without a type

Arguments may nest declarations, so `l/like(user, watch(user, m))` names the
inner watch predicate automatically. Arity is capped at two.

Rule blocks pair a precondition pattern with a postcondition:

    rule <name> <kind> [priority] [distinct]: <pre> -> <post>

Kinds are infer, transform, react, present, and template. Names in rule
patterns that are not bound to knowledge become variables; `_` is an
anonymous wildcard. Postconditions vary by kind: inference and response rules
carry graph recipes (plus var/ref reference declarations), transformation
rules carry attach(span, slot, span) instructions, and template rules carry a
quoted template string with {slot} and {verb:lemma@Var.feature} tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    ArityError,
    KBSyntaxError,
    RedefinitionError,
    UnknownKindError,
)
from .graph import ConceptGraph

TENSES = ("past", "now", "future")
REF_PTYPE = "ref"
VAR_PTYPE = "var"

_KIND_NAMES = {
    "infer": "inference",
    "transform": "transformation",
    "react": "reaction",
    "present": "presentation",
    "template": "template",
}
_PRIORITIES = ("low", "mid", "high", "critical")
_SLOTS = {"t": "T", "arg0": "ARG0", "arg1": "ARG1"}


# ---------------------------------------------------------------------------
# data types produced by the compiler
# ---------------------------------------------------------------------------

@dataclass
class SourceUnit:
    path: str
    text: str


@dataclass(frozen=True)
class TemplateToken:
    """One template element: a literal, a slot, or an inflectable lemma."""

    kind: str  # "literal" | "slot" | "inflect"
    text: str = ""
    var: str = ""
    lemma: str = ""
    feature: str = ""


@dataclass
class PostPattern:
    """Recipe for instantiating a postcondition.

    Names fall into three classes: precondition variables (substituted from
    the solution), knowledge constants (kept as is), and locals (a fresh id
    per instantiation). The ops are applied in declaration order.
    """

    concepts: list[tuple[str, tuple[str, ...]]] = field(default_factory=list)
    predicates: list[tuple[str, str, str, str | None]] = field(default_factory=list)
    negated: tuple[str, ...] = ()
    tenses: list[tuple[str, str]] = field(default_factory=list)
    var_decls: list[tuple[str, str]] = field(default_factory=list)
    ref_decls: list[tuple[str, str]] = field(default_factory=list)
    locals: frozenset[str] = frozenset()
    pre_vars: frozenset[str] = frozenset()

    def is_empty(self) -> bool:
        return not (self.concepts or self.predicates or self.var_decls or self.ref_decls)


@dataclass
class Rule:
    """One compiled rule block of any kind."""

    name: str
    kind: str  # inference | transformation | reaction | presentation | template
    pattern: "QueryGraph"
    post: PostPattern | None = None
    attachments: list[tuple[str, str, str]] = field(default_factory=list)
    ref_types: list[tuple[str, str]] = field(default_factory=list)
    priority: str | None = None
    template: tuple[TemplateToken, ...] = ()
    template_text: str = ""
    source: str = ""


@dataclass
class CompileResult:
    graph: ConceptGraph
    rules: list[Rule]
    warnings: list[str]


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[/(),:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident | string | punct | arrow | eof
    value: str
    line: int
    col: int


def _tokenize(text: str, path: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise KBSyntaxError(f"{path}: unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        col = pos - line_start + 1
        if kind == "ws":
            for i, ch in enumerate(value):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        elif kind == "comment":
            pass
        elif kind == "string":
            toks.append(_Tok("string", _unquote(value, path, line, col), line, col))
        else:
            toks.append(_Tok(kind, value, line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, 1))
    return toks


def _unquote(raw: str, path: str, line: int, col: int) -> str:
    body = raw[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body):
                raise KBSyntaxError(f"{path}: dangling escape in string", line, col)
            nxt = body[i + 1]
            out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


# ---------------------------------------------------------------------------
# parse tree
# ---------------------------------------------------------------------------

@dataclass
class _Expr:
    """A declaration expression: [name/]type(args) or a bare reference."""

    name: str | None
    type: str | None
    type_quoted: bool
    args: list["_Expr"] | None  # None for a bare reference
    line: int
    col: int

    @property
    def is_bare(self) -> bool:
        return self.args is None and self.type is None


class _Parser:
    def __init__(self, toks: list[_Tok], path: str):
        self.toks = toks
        self.i = 0
        self.path = path

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, value: str | None = None) -> _Tok:
        tok = self.next()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise KBSyntaxError(
                f"{self.path}: expected {want!r}, found {tok.value or tok.kind!r}",
                tok.line, tok.col)
        return tok

    def error(self, message: str, tok: _Tok | None = None) -> KBSyntaxError:
        tok = tok or self.peek()
        return KBSyntaxError(f"{self.path}: {message}", tok.line, tok.col)

    # -- expressions -------------------------------------------------------

    def parse_expr(self) -> _Expr:
        head = self.next()
        if head.kind not in ("ident", "string"):
            raise self.error("expected a name", head)
        quoted = head.kind == "string"
        if self.peek().kind == "punct" and self.peek().value == "/":
            self.next()
            if self.peek().kind == "punct" and self.peek().value == "(":
                # typeless named concept: name/()
                self.next()
                self.expect("punct", ")")
                return _Expr(head.value, None, False, [], head.line, head.col)
            type_tok = self.next()
            if type_tok.kind not in ("ident", "string"):
                raise self.error("expected a type name after '/'", type_tok)
            self.expect("punct", "(")
            args = self.parse_args()
            return _Expr(head.value, type_tok.value, type_tok.kind == "string",
                         args, head.line, head.col)
        if self.peek().kind == "punct" and self.peek().value == "(":
            self.next()
            args = self.parse_args()
            return _Expr(None, head.value, quoted, args, head.line, head.col)
        return _Expr(head.value, None, False, None, head.line, head.col)

    def parse_args(self) -> list[_Expr]:
        args: list[_Expr] = []
        if self.peek().kind == "punct" and self.peek().value == ")":
            self.next()
            return args
        while True:
            args.append(self.parse_expr())
            tok = self.next()
            if tok.kind == "punct" and tok.value == ")":
                return args
            if not (tok.kind == "punct" and tok.value == ","):
                raise self.error("expected ',' or ')' in argument list", tok)


# ---------------------------------------------------------------------------
# negation normalization
# ---------------------------------------------------------------------------

def parse_negation(applications: list[tuple[str | None, str]],
                   location: str = "") -> tuple[dict[str, bool], set[str], list[str]]:
    """Resolve a list of (negation name, target) applications.

    Returns the truth assignment for negated targets, the set of named
    negation nodes to remove, and warnings. A negation whose target is itself
    a named negation cancels out: the innermost target ends up positive.
    """
    named = {name: target for name, target in applications if name is not None}
    truth: dict[str, bool] = {}
    removed: set[str] = set(named)
    warnings: list[str] = []
    targets = {target for _, target in applications}
    for start in named:
        seen = {start}
        cur = named[start]
        while cur in named:
            if cur in seen:
                raise KBSyntaxError(f"{location}: circular negation at {cur!r}")
            seen.add(cur)
            cur = named[cur]
    for name, target in applications:
        if name is not None and name in targets:
            # intermediate link of a chain, consumed by the outer negation
            continue
        flips = 1
        while target in named:
            target = named[target]
            flips += 1
        if flips > 1:
            warnings.append(
                f"{location}: double negation on {target!r} normalizes to "
                + ("positive" if flips % 2 == 0 else "negative"))
        truth[target] = flips % 2 == 0
    return truth, removed, warnings


# ---------------------------------------------------------------------------
# compilation contexts
# ---------------------------------------------------------------------------

class IdMint:
    """Deterministic fresh-id source shared across one compile run."""

    def __init__(self, taken: set[str]):
        self.taken = taken
        self.counts: dict[str, int] = {}

    def fresh(self, prefix: str) -> str:
        prefix = re.sub(r"[^A-Za-z0-9_]", "_", prefix) or "c"
        n = self.counts.get(prefix, 0)
        while True:
            n += 1
            candidate = f"{prefix}_{n}"
            if candidate not in self.taken:
                self.counts[prefix] = n
                self.taken.add(candidate)
                return candidate


class _KnowledgeCtx:
    """Emits declarations into a graph, tracking negations as it goes."""

    def __init__(self, graph: ConceptGraph, mint: IdMint, path: str,
                 warnings: list[str]):
        self.graph = graph
        self.mint = mint
        self.path = path
        self.warnings = warnings
        self.negations: list[tuple[str | None, str]] = []

    def emit(self, expr: _Expr, nested: bool = False) -> str:
        g = self.graph
        if expr.is_bare:
            if expr.name == "_":
                raise KBSyntaxError(
                    f"{self.path}: '_' is only meaningful inside rule patterns",
                    expr.line, expr.col)
            g.add_concept(expr.name)
            self.mint.taken.add(expr.name)
            return expr.name
        if expr.type is None:  # name/()
            g.add_concept(expr.name)
            self.mint.taken.add(expr.name)
            return expr.name

        assert expr.args is not None
        if expr.type == "type":
            if nested:
                raise KBSyntaxError(f"{self.path}: type() cannot be nested",
                                    expr.line, expr.col)
            if len(expr.args) != 2:
                raise ArityError(f"{self.path}: type() takes exactly two arguments",
                                 expr.line, expr.col)
            child = self.emit(expr.args[0], nested=True)
            parent = self.emit(expr.args[1], nested=True)
            g.add_type_edge(child, parent)
            return child
        if expr.type == "not":
            if nested:
                raise KBSyntaxError(f"{self.path}: not() cannot be nested",
                                    expr.line, expr.col)
            if len(expr.args) != 1:
                raise ArityError(f"{self.path}: not() takes exactly one argument",
                                 expr.line, expr.col)
            target = self.emit(expr.args[0], nested=True)
            self.negations.append((expr.name, target))
            if expr.name is not None:
                self.mint.taken.add(expr.name)
            return target

        if len(expr.args) > 2:
            raise ArityError(
                f"{self.path}: predicate {expr.type!r} declared with "
                f"{len(expr.args)} arguments; the maximum arity is 2",
                expr.line, expr.col)

        name = expr.name or self.mint.fresh(expr.type)
        self.mint.taken.add(name)
        if not expr.args:
            g.add_concept(name)
            g.add_type_edge(name, expr.type)
            return name

        arg_ids = [self.emit(a, nested=True) for a in expr.args]
        subject = arg_ids[0]
        obj = arg_ids[1] if len(arg_ids) == 2 else None
        g.add_predicate(name, expr.type, subject, obj)
        if expr.type == "time":
            if obj not in TENSES:
                raise KBSyntaxError(
                    f"{self.path}: time() marker must be one of {TENSES}, "
                    f"found {obj!r}", expr.line, expr.col)
            g.features[subject].tense = obj
        return name

    def finish(self) -> None:
        truth, removed, warns = parse_negation(self.negations, self.path)
        self.warnings.extend(warns)
        for target, positive in truth.items():
            if target not in self.graph:
                raise KBSyntaxError(f"{self.path}: not() target {target!r} is undeclared")
            self.graph.features[target].truth = positive
        self.graph.remove_concepts(removed)


class _PatternCtx:
    """Builds a query pattern, classifying names as constants or variables."""

    def __init__(self, kb: ConceptGraph, local_graph: ConceptGraph, mint: IdMint,
                 path: str, rule_name: str, warnings: list[str]):
        from .matcher import QueryGraph  # local import to avoid a cycle at load

        self.kb = kb
        self.local = local_graph
        self.path = path
        self.rule_name = rule_name
        self.warnings = warnings
        self.mint = mint
        self.pattern = ConceptGraph()
        self.variables: list[str] = []
        self.truth: dict[str, bool] = {}
        self._qg = QueryGraph

    def is_known(self, name: str) -> bool:
        return name in self.kb or name in self.local

    def type_constant(self, name: str, quoted: bool, line: int, col: int) -> str:
        if quoted:
            return f"word:{name.lower()}"
        if not self.is_known(name):
            self.warnings.append(
                f"{self.path}: rule {self.rule_name!r} uses type {name!r} "
                "absent from the knowledge base")
        return name

    def reference(self, name: str, line: int, col: int) -> str:
        if name == "_":
            var = self.mint.fresh("_")
            self.variables.append(var)
            self.pattern.add_concept(var)
            return var
        if name in TENSES:
            self.pattern.add_concept(name)
            return name
        if not self.is_known(name) and name not in self.variables:
            self.variables.append(name)
            if name[:1].islower():
                self.warnings.append(
                    f"{self.path}: rule {self.rule_name!r} variable {name!r} is "
                    "lowercase; uppercase names are the convention for variables")
        self.pattern.add_concept(name)
        return name

    def emit(self, expr: _Expr, nested: bool = False) -> str:
        if expr.is_bare:
            return self.reference(expr.name, expr.line, expr.col)
        if expr.type is None:
            return self.reference(expr.name, expr.line, expr.col)
        assert expr.args is not None

        if expr.type == "type":
            if len(expr.args) != 2:
                raise ArityError(f"{self.path}: type() takes exactly two arguments",
                                 expr.line, expr.col)
            child = self.emit(expr.args[0], nested=True)
            parent_expr = expr.args[1]
            if not parent_expr.is_bare:
                raise KBSyntaxError(f"{self.path}: type() parent must be a name",
                                    expr.line, expr.col)
            parent = self.type_constant(parent_expr.name, False,
                                        parent_expr.line, parent_expr.col)
            self.pattern.add_type_edge(child, parent)
            return child
        if expr.type == "not":
            if len(expr.args) != 1:
                raise ArityError(f"{self.path}: not() takes exactly one argument",
                                 expr.line, expr.col)
            target = self.emit(expr.args[0], nested=True)
            if target not in self.pattern.signatures:
                raise KBSyntaxError(
                    f"{self.path}: not() in a pattern must target a predicate",
                    expr.line, expr.col)
            self.truth[target] = not self.truth.get(target, True)
            return target

        if len(expr.args) > 2:
            raise ArityError(
                f"{self.path}: predicate {expr.type!r} declared with "
                f"{len(expr.args)} arguments; the maximum arity is 2",
                expr.line, expr.col)

        ptype = self.type_constant(expr.type, expr.type_quoted, expr.line, expr.col)
        if not expr.args:
            name = self.reference(expr.name, expr.line, expr.col) if expr.name \
                else self.mint.fresh("_")
            if expr.name is None:
                self.variables.append(name)
            self.pattern.add_type_edge(name, ptype)
            return name

        if expr.name is not None:
            name = self.reference(expr.name, expr.line, expr.col)
        else:
            name = self.mint.fresh("_")
            self.variables.append(name)
        arg_ids = [self.emit(a, nested=True) for a in expr.args]
        subject = arg_ids[0]
        obj = arg_ids[1] if len(arg_ids) == 2 else None
        if name in self.pattern.signatures and self.pattern.signatures[name] != (subject, obj):
            raise RedefinitionError(
                f"{self.path}: pattern predicate {name!r} declared twice with "
                "different arguments", expr.line, expr.col)
        self.pattern.add_predicate(name, ptype, subject, obj)
        self.truth.setdefault(name, True)
        return name

    def finish(self, name: str, distinct: bool) -> "QueryGraph":
        from .matcher import QueryGraph

        return QueryGraph(
            name=name,
            pattern=self.pattern,
            variables=tuple(self.variables),
            truth_requirements=dict(self.truth),
            distinct=distinct,
        )


# ---------------------------------------------------------------------------
# template text parsing
# ---------------------------------------------------------------------------

_INFLECT_RE = re.compile(r"^(verb|noun):([A-Za-z_][A-Za-z0-9_]*)@([A-Za-z_][A-Za-z0-9_]*)\.(tense|number)$")


def parse_template_text(text: str, variables: set[str], path: str,
                        rule_name: str) -> tuple[TemplateToken, ...]:
    tokens: list[TemplateToken] = []
    pos = 0
    while pos < len(text):
        brace = text.find("{", pos)
        if brace < 0:
            tokens.append(TemplateToken("literal", text=text[pos:]))
            break
        if brace > pos:
            tokens.append(TemplateToken("literal", text=text[pos:brace]))
        end = text.find("}", brace)
        if end < 0:
            raise KBSyntaxError(f"{path}: unclosed '{{' in template of rule {rule_name!r}")
        body = text[brace + 1:end]
        m = _INFLECT_RE.match(body)
        if m:
            _, lemma, var, feature = m.groups()
            if var not in variables:
                raise KBSyntaxError(
                    f"{path}: template of rule {rule_name!r} inflects on unknown "
                    f"variable {var!r}")
            tokens.append(TemplateToken("inflect", lemma=lemma, var=var, feature=feature))
        else:
            if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", body):
                raise KBSyntaxError(
                    f"{path}: bad template token {{{body}}} in rule {rule_name!r}")
            if body not in variables:
                raise KBSyntaxError(
                    f"{path}: template slot {{{body}}} of rule {rule_name!r} is not "
                    "a precondition variable")
            tokens.append(TemplateToken("slot", var=body))
        pos = end + 1
    return tuple(tokens)


# ---------------------------------------------------------------------------
# rule block compilation
# ---------------------------------------------------------------------------

def _compile_rule(parser: _Parser, kb: ConceptGraph, local_graph: ConceptGraph,
                  mint: IdMint, warnings: list[str],
                  taken_names: set[tuple[str, str]]) -> Rule:
    head = parser.expect("ident")  # the word "rule", checked by caller
    name_tok = parser.next()
    if name_tok.kind != "ident":
        raise parser.error("expected a rule name", name_tok)
    kind_tok = parser.next()
    if kind_tok.kind != "ident" or kind_tok.value not in _KIND_NAMES:
        raise UnknownKindError(
            f"{parser.path}: unknown rule kind {kind_tok.value!r}; expected one of "
            f"{sorted(_KIND_NAMES)}", kind_tok.line, kind_tok.col)
    kind = _KIND_NAMES[kind_tok.value]

    priority: str | None = None
    distinct = False
    while parser.peek().kind == "ident":
        tok = parser.next()
        if tok.value in _PRIORITIES:
            if kind not in ("reaction", "presentation"):
                raise KBSyntaxError(
                    f"{parser.path}: priority applies only to response rules",
                    tok.line, tok.col)
            priority = tok.value
        elif tok.value == "distinct":
            distinct = True
        else:
            raise parser.error(f"unexpected rule modifier {tok.value!r}", tok)
    parser.expect("punct", ":")
    if kind in ("reaction", "presentation") and priority is None:
        priority = "mid"

    # Templates live in their own namespace: pairing a template with a
    # response rule requires sharing its name.
    name_key = ("template" if kind == "template" else "rule", name_tok.value)
    if name_key in taken_names:
        raise RedefinitionError(f"{parser.path}: {name_key[0]} {name_tok.value!r} "
                                "declared twice", name_tok.line, name_tok.col)
    taken_names.add(name_key)

    pctx = _PatternCtx(kb, local_graph, mint, parser.path, name_tok.value, warnings)
    while not (parser.peek().kind == "arrow" or parser.peek().kind == "eof"):
        pctx.emit(parser.parse_expr())
    parser.expect("arrow")
    pattern = pctx.finish(name_tok.value, distinct)
    if not pattern.pattern.signatures and not pattern.pattern.features:
        raise KBSyntaxError(f"{parser.path}: rule {name_tok.value!r} has an empty "
                            "precondition", head.line, head.col)

    rule = Rule(name=name_tok.value, kind=kind, pattern=pattern, priority=priority,
                source=f"{parser.path}:{head.line}")

    if kind == "template":
        tok = parser.next()
        if tok.kind != "ident" or tok.value != "template":
            raise parser.error("template rules need a 'template \"...\"' postcondition", tok)
        text_tok = parser.next()
        if text_tok.kind != "string":
            raise parser.error("expected a quoted template string", text_tok)
        rule.template_text = text_tok.value
        rule.template = parse_template_text(
            text_tok.value, set(pattern.variables), parser.path, name_tok.value)
        return rule

    post = _PostBuilder(pctx, parser, kind)
    # empty postcondition: "()"
    if parser.peek().kind == "punct" and parser.peek().value == "(":
        parser.next()
        parser.expect("punct", ")")
    else:
        while not _at_block_end(parser):
            post.emit(parser.parse_expr())
    rule.post = post.finish()
    rule.attachments = post.attachments
    rule.ref_types = post.ref_types
    if (kind == "transformation" and not rule.attachments and not rule.ref_types
            and not rule.post.var_decls and not rule.post.ref_decls
            and not rule.post.tenses):
        warnings.append(f"{parser.path}: transformation rule {name_tok.value!r} "
                        "has no attachments")
    if kind == "inference" and rule.post.is_empty():
        raise KBSyntaxError(f"{parser.path}: inference rule {name_tok.value!r} has an "
                            "empty postcondition")
    return rule


def _at_block_end(parser: _Parser) -> bool:
    tok = parser.peek()
    if tok.kind == "eof":
        return True
    return tok.kind == "ident" and tok.value == "rule" and _looks_like_block(parser)


def _looks_like_block(parser: _Parser) -> bool:
    """True when the upcoming 'rule' token opens a new block.

    "rule <name> <word>" always opens one; an unrecognized kind word then
    raises a clear UnknownKindError instead of knowledge-syntax noise.
    """
    toks = parser.toks
    i = parser.i
    return (i + 2 < len(toks)
            and toks[i + 1].kind == "ident"
            and toks[i + 2].kind == "ident")


class _PostBuilder:
    """Collects postcondition ops for inference, response, and transform rules."""

    def __init__(self, pctx: _PatternCtx, parser: _Parser, kind: str):
        self.pctx = pctx
        self.parser = parser
        self.kind = kind
        self.concepts: list[tuple[str, tuple[str, ...]]] = []
        self.predicates: list[tuple[str, str, str, str | None]] = []
        self.negations: list[tuple[str | None, str]] = []
        self.tenses: list[tuple[str, str]] = []
        self.var_decls: list[tuple[str, str]] = []
        self.ref_decls: list[tuple[str, str]] = []
        self.attachments: list[tuple[str, str, str]] = []
        self.ref_types: list[tuple[str, str]] = []
        self.local_names: list[str] = []
        self.declared_preds: set[str] = set()

    def _classify(self, name: str, line: int, col: int) -> str:
        if name == "_":
            raise KBSyntaxError(f"{self.parser.path}: '_' is not allowed in "
                                "postconditions", line, col)
        if name in TENSES:
            return name
        if name in self.pctx.variables:
            return name
        if self.pctx.is_known(name):
            return name
        if name not in self.local_names:
            self.local_names.append(name)
        return name

    def emit(self, expr: _Expr, nested: bool = False) -> str:
        path = self.parser.path
        if expr.is_bare or expr.type is None:
            name = self._classify(expr.name, expr.line, expr.col)
            if (name, ()) not in self.concepts and name in self.local_names:
                self.concepts.append((name, ()))
            return name
        assert expr.args is not None

        if expr.type == "attach":
            if self.kind != "transformation":
                raise KBSyntaxError(f"{path}: attach() belongs in transformation rules",
                                    expr.line, expr.col)
            if len(expr.args) != 3 or not all(a.is_bare for a in expr.args):
                raise KBSyntaxError(f"{path}: attach() takes (span, slot, span)",
                                    expr.line, expr.col)
            a, slot_e, b = expr.args
            slot = _SLOTS.get(slot_e.name.lower())
            if slot is None:
                raise KBSyntaxError(f"{path}: attach() slot must be one of "
                                    f"{sorted(_SLOTS)}", slot_e.line, slot_e.col)
            for span in (a, b):
                if span.name not in self.pctx.variables:
                    raise KBSyntaxError(
                        f"{path}: attach() span {span.name!r} is not a pattern variable",
                        span.line, span.col)
            self.attachments.append((a.name, slot, b.name))
            return a.name

        if expr.type == "var":
            if len(expr.args) not in (1, 2) or not all(a.is_bare for a in expr.args):
                raise KBSyntaxError(f"{path}: var() takes (focus[, variable])",
                                    expr.line, expr.col)
            focus = self._classify(expr.args[0].name, expr.line, expr.col)
            var = focus if len(expr.args) == 1 else \
                self._classify(expr.args[1].name, expr.line, expr.col)
            self.var_decls.append((focus, var))
            return focus

        if expr.type == "ref":
            if len(expr.args) != 2 or not all(a.is_bare for a in expr.args):
                raise KBSyntaxError(f"{path}: ref() takes (focus, constraint)",
                                    expr.line, expr.col)
            focus = self._classify(expr.args[0].name, expr.line, expr.col)
            constraint = self._classify(expr.args[1].name, expr.line, expr.col)
            self.ref_decls.append((focus, constraint))
            return focus

        if expr.type == "type":
            if len(expr.args) != 2:
                raise ArityError(f"{path}: type() takes exactly two arguments",
                                 expr.line, expr.col)
            child = self.emit(expr.args[0], nested=True)
            parent_expr = expr.args[1]
            if not parent_expr.is_bare:
                raise KBSyntaxError(f"{path}: type() parent must be a name",
                                    expr.line, expr.col)
            parent = self.pctx.type_constant(parent_expr.name, False,
                                             parent_expr.line, parent_expr.col)
            self._add_types(child, (parent,))
            return child

        if expr.type == "not":
            if len(expr.args) != 1:
                raise ArityError(f"{path}: not() takes exactly one argument",
                                 expr.line, expr.col)
            target = self.emit(expr.args[0], nested=True)
            self.negations.append((expr.name, target))
            return target

        if len(expr.args) > 2:
            raise ArityError(f"{path}: predicate {expr.type!r} declared with "
                             f"{len(expr.args)} arguments; the maximum arity is 2",
                             expr.line, expr.col)

        ptype = self.pctx.type_constant(expr.type, expr.type_quoted, expr.line, expr.col)

        if self.kind == "transformation" and not expr.args:
            # type annotation on a span variable, recorded as a reference
            # constraint: Y/item()
            if expr.name is None or expr.name not in self.pctx.variables:
                raise KBSyntaxError(
                    f"{path}: transformation postconditions may only annotate "
                    "pattern variables with types", expr.line, expr.col)
            self.ref_types.append((expr.name, ptype))
            return expr.name

        if expr.name is not None:
            name = self._classify(expr.name, expr.line, expr.col)
        else:
            name = f"~{ptype}~{len(self.local_names)}"
            self.local_names.append(name)

        if not expr.args:
            self._add_types(name, (ptype,))
            return name

        arg_ids = [self.emit(a, nested=True) for a in expr.args]
        subject = arg_ids[0]
        obj = arg_ids[1] if len(arg_ids) == 2 else None
        if name in self.declared_preds:
            raise RedefinitionError(f"{path}: postcondition predicate {name!r} "
                                    "declared twice", expr.line, expr.col)
        self.declared_preds.add(name)
        self.predicates.append((name, ptype, subject, obj))
        if ptype == "time":
            if obj not in TENSES:
                raise KBSyntaxError(f"{path}: time() marker must be one of {TENSES}",
                                    expr.line, expr.col)
            self.tenses.append((subject, obj))
        return name

    def _add_types(self, name: str, types: tuple[str, ...]) -> None:
        for i, (existing, ts) in enumerate(self.concepts):
            if existing == name:
                self.concepts[i] = (name, ts + types)
                return
        self.concepts.append((name, types))

    def finish(self) -> PostPattern:
        truth, removed, warns = parse_negation(self.negations, self.parser.path)
        self.pctx.warnings.extend(warns)
        for name in removed:
            self.predicates = [p for p in self.predicates if p[0] != name]
            if name in self.local_names:
                self.local_names.remove(name)
        negated = tuple(sorted(t for t, positive in truth.items() if not positive))
        return PostPattern(
            concepts=self.concepts,
            predicates=self.predicates,
            negated=negated,
            tenses=self.tenses,
            var_decls=self.var_decls,
            ref_decls=self.ref_decls,
            locals=frozenset(self.local_names),
            pre_vars=frozenset(self.pctx.variables),
        )


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def compile_units(units: list[SourceUnit], kb: ConceptGraph | None = None) -> CompileResult:
    """Compile source units against an optional existing knowledge base.

    Knowledge declarations land in the result graph; rule patterns classify
    names against the union of the knowledge base and the declarations seen
    so far. The knowledge base itself is not modified.
    """
    base = kb if kb is not None else ConceptGraph()
    graph = ConceptGraph()
    rules: list[Rule] = []
    warnings: list[str] = []
    taken = set(base.features) | {"_"}
    mint = IdMint(taken)
    rule_names: set[tuple[str, str]] = set()

    for unit in units:
        parser = _Parser(_tokenize(unit.text, unit.path), unit.path)
        kctx = _KnowledgeCtx(graph, mint, unit.path, warnings)
        while parser.peek().kind != "eof":
            tok = parser.peek()
            if tok.kind == "ident" and tok.value == "rule" and _looks_like_block(parser):
                rules.append(_compile_rule(parser, base, graph, mint, warnings, rule_names))
            else:
                kctx.emit(parser.parse_expr())
        kctx.finish()
    graph.validate()
    return CompileResult(graph=graph, rules=rules, warnings=warnings)


def compile_text(text: str, kb: ConceptGraph | None = None, path: str = "<text>") -> CompileResult:
    return compile_units([SourceUnit(path=path, text=text)], kb)


def compile_pattern(text: str, kb: ConceptGraph | None = None,
                    name: str = "query", path: str = "<pattern>"):
    """Compile declarations as one standalone query pattern.

    Names unknown to the knowledge base become variables, exactly as in a
    rule precondition. Returns (QueryGraph, warnings).
    """
    base = kb if kb is not None else ConceptGraph()
    warnings: list[str] = []
    mint = IdMint(set(base.features) | {"_"})
    parser = _Parser(_tokenize(text, path), path)
    pctx = _PatternCtx(base, ConceptGraph(), mint, path, name, warnings)
    while parser.peek().kind != "eof":
        pctx.emit(parser.parse_expr())
    return pctx.finish(name, distinct=False), warnings


_PLAIN_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _quote_id(name: str) -> str:
    if _PLAIN_ID.match(name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize(graph: ConceptGraph) -> str:
    """Render a graph back to knowledge-language text.

    Deterministic: concepts sort by id, a predicate line uses the declared
    instance type, extra direct parents become type() lines, and negative
    truth becomes a not() line after the declaration.
    """
    lines: list[str] = []
    plain = sorted(c for c in graph.features if c not in graph.signatures)
    preds = sorted(graph.signatures)
    for c in plain:
        parents = sorted(graph.parents.get(c, ()))
        head = _quote_id(c)
        if parents:
            lines.append(f"{head}/{_quote_id(parents[0])}()")
            for extra in parents[1:]:
                lines.append(f"type({head}, {_quote_id(extra)})")
        else:
            lines.append(f"{head}/()")
    for p in preds:
        subject, obj = graph.signatures[p]
        parents = sorted(graph.parents.get(p, ()))
        ptype = graph.ptypes.get(p) or (parents[0] if parents else "")
        if not ptype:
            raise RedefinitionError(f"predicate {p!r} has no type to serialize")
        args = _quote_id(subject) if obj is None else f"{_quote_id(subject)}, {_quote_id(obj)}"
        lines.append(f"{_quote_id(p)}/{_quote_id(ptype)}({args})")
        for extra in parents:
            if extra != ptype:
                lines.append(f"type({_quote_id(p)}, {_quote_id(extra)})")
        if not graph.features[p].truth:
            lines.append(f"not({_quote_id(p)})")
    return "\n".join(lines) + "\n"
