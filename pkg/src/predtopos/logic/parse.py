"""Recursive-descent parser for formulas.

Grammar::

    formula  := iff
    iff      := imp ("<->" imp)?
    imp      := disj ("->" imp)?
    disj     := conj (("|" | "or") conj)*
    conj     := unary (("&" | "and") unary)*
    unary    := ("~" | "not") unary
              | ("forall" | "exists") binder ("," binder)* "." formula
              | atom
    binder   := IDENT (":" | "in") IDENT
    atom     := "true" | "false" | "(" formula ")"
              | term "=" term | IDENT ("(" term ("," term)* ")")?
    term     := IDENT ("(" term ("," term)* ")")?

Unicode ``∀ ∃ ∧ ∨ → ↔ ¬ ⊤ ⊥ ∈`` are accepted as aliases.  Quantifier bodies
extend as far to the right as possible.  ``a <-> b`` abbreviates
``(a -> b) & (b -> a)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import FormulaSyntaxError, SortError
from .syntax import And, App, Bot, Eq, Exists, Forall, Imp, Not, Or, Pred, Top, Var

_ALIASES = {
    "∀": "forall", "∃": "exists", "∧": "&", "/\\": "&", "and": "&", "∨": "|", "\\/": "|", "or": "|",
    "→": "->", "⇒": "->", "↔": "<->", "¬": "~", "not": "~", "⊤": "true", "⊥": "false", "∈": "in",
}
_TOKEN = re.compile(r"\s*(<->|->|/\\|\\/|[∀∃∧∨→⇒↔¬⊤⊥∈()=,.:&|~]|[\w∅'^]+)")
_KEYWORDS = {"forall", "exists", "true", "false", "in", "&", "|", "->", "<->", "~"}


@dataclass(frozen=True)
class Signature:
    """Sort names plus typed function and predicate symbols.

    ``functions[name] = (arg_sorts, result_sort)``; ``predicates[name] = arg_sorts``.
    """

    sorts: frozenset = frozenset()
    functions: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=dict)


def tokenize(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[start]!r}", pos=start)
        tok = m.group(1)
        out.append((_ALIASES.get(tok, tok), m.start(1)))
        pos = m.end()
    out.append(("<eof>", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, sig: Signature | None, free: dict[str, str]):
        self.toks = tokenize(text)
        self.i = 0
        self.sig = sig
        self.scope: list[tuple[str, str]] = list(free.items())

    # -- token helpers
    def peek(self, k: int = 0) -> str:
        return self.toks[min(self.i + k, len(self.toks) - 1)][0]

    def pos(self) -> int:
        return self.toks[self.i][1]

    def take(self, expected: str | None = None) -> str:
        tok, pos = self.toks[self.i]
        if expected is not None and tok != expected:
            raise FormulaSyntaxError(f"expected {expected!r}, found {tok!r}", pos=pos)
        self.i += 1
        return tok

    def ident(self) -> str:
        tok, pos = self.toks[self.i]
        if tok in _KEYWORDS or not re.fullmatch(r"[\w∅'^]+", tok):
            raise FormulaSyntaxError(f"expected a name, found {tok!r}", pos=pos)
        self.i += 1
        return tok

    def lookup(self, name: str) -> str | None:
        for v, s in reversed(self.scope):
            if v == name:
                return s
        return None

    # -- grammar
    def formula(self):
        left = self.imp()
        if self.peek() == "<->":
            self.take()
            right = self.imp()
            return And(Imp(left, right), Imp(right, left))
        return left

    def imp(self):
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Imp(left, self.imp())
        return left

    def disj(self):
        left = self.conj()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok in ("forall", "exists"):
            self.take()
            binders = [self.binder()]
            while self.peek() == ",":
                self.take()
                binders.append(self.binder())
            self.take(".")
            for b in binders:
                self.scope.append(b)
            body = self.formula()
            for _ in binders:
                self.scope.pop()
            node = Forall if tok == "forall" else Exists
            for v, s in reversed(binders):
                body = node(v, s, body)
            return body
        return self.atom()

    def binder(self):
        v = self.ident()
        if self.peek() not in (":", "in"):
            raise FormulaSyntaxError(f"expected ':' after bound variable {v!r}", pos=self.pos())
        self.take()
        spos = self.pos()
        s = self.ident()
        if self.sig is not None and s not in self.sig.sorts:
            raise SortError(f"unknown sort {s!r} at position {spos}", var=v)
        return v, s

    def atom(self):
        tok = self.peek()
        if tok == "true":
            self.take()
            return Top()
        if tok == "false":
            self.take()
            return Bot()
        if tok == "(":
            self.take()
            phi = self.formula()
            self.take(")")
            return phi
        pos = self.pos()
        name = self.ident()
        args = self.arglist()
        if self.peek() == "=":
            left = self.make_term(name, args, pos)
            self.take()
            rpos = self.pos()
            rname = self.ident()
            right = self.make_term(rname, self.arglist(), rpos)
            ls, rs = self.sort_of(left), self.sort_of(right)
            if ls is not None and rs is not None and ls != rs:
                raise SortError(f"equation at position {pos} compares sorts {ls} and {rs}", var=str(left))
            return Eq(left, right)
        if args is None:
            args = ()
        return self.make_pred(name, args, pos)

    def arglist(self):
        if self.peek() != "(":
            return None
        self.take()
        args = [self.term()]
        while self.peek() == ",":
            self.take()
            args.append(self.term())
        self.take(")")
        return args

    def term(self):
        pos = self.pos()
        name = self.ident()
        return self.make_term(name, self.arglist(), pos)

    # -- sort checking
    def make_term(self, name, args, pos):
        if args is None:
            if self.lookup(name) is not None:
                return Var(name)
            if self.sig is not None and name in self.sig.functions and not self.sig.functions[name][0]:
                return App(name, ())
            if self.sig is None and name[:1].isdigit():
                return App(name, ())
            raise SortError(f"variable {name!r} at position {pos} is not bound", var=name)
        if self.sig is not None:
            if name not in self.sig.functions:
                raise SortError(f"unknown function symbol {name!r} at position {pos}", var=name)
            expected = self.sig.functions[name][0]
            if len(expected) != len(args):
                raise SortError(f"{name} takes {len(expected)} arguments, given {len(args)}", var=name)
            for a, s in zip(args, expected):
                got = self.sort_of(a)
                if got != s:
                    raise SortError(f"argument {a} of {name} has sort {got}, expected {s}", var=str(a))
        return App(name, tuple(args))

    def make_pred(self, name, args, pos):
        if self.sig is not None:
            if name not in self.sig.predicates:
                raise SortError(f"unknown predicate {name!r} at position {pos}", var=name)
            expected = self.sig.predicates[name]
            if len(expected) != len(args):
                raise SortError(f"{name} takes {len(expected)} arguments, given {len(args)}", var=name)
            for a, s in zip(args, expected):
                got = self.sort_of(a)
                if got != s:
                    raise SortError(f"argument {a} of {name} has sort {got}, expected {s}", var=str(a))
        return Pred(name, tuple(args))

    def sort_of(self, t):
        if isinstance(t, Var):
            return self.lookup(t.name)
        if self.sig is None:
            return None
        return self.sig.functions[t.fn][1]


def parse_formula(text: str, signature=None, free: dict[str, str] | None = None):
    """Parse ``text``; with a signature (or a Structure) the result is sort-checked.

    ``free`` declares variables that may occur free, with their sorts.
    """
    sig = signature.signature() if hasattr(signature, "signature") else signature
    p = _Parser(text, sig, dict(free or {}))
    phi = p.formula()
    if p.peek() != "<eof>":
        raise FormulaSyntaxError(f"unexpected {p.peek()!r}", pos=p.pos())
    return phi
