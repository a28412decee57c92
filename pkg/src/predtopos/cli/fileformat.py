"""Parser for the plain-text description format.

A file is a sequence of lines.  ``#`` starts a comment.  A header line opens
a named block (``category``, ``presheaf``, ``site``, ``set``, ``map``,
``nat``, ``sig``, ``space``, ``relation``, ``structure``, ``square``,
``formula``); entry lines attach to the most recent block of the matching
kind.  Names are resolved only after every file is read, so blocks may refer
to blocks defined later.  The grammar is in ``docs/FORMAT.md``.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Any, Iterable

from ..amc.squares import Square
from ..core.category import FiniteCategory, validate_category
from ..core.presheaf import NatTrans, Presheaf
from ..core.psh import FinPsh
from ..errors import DuplicateName, ParseError, PredToposError, UnknownName
from ..finset import FinSet, FinSetMap, FinSetObj
from ..logic.semantics import Structure
from ..sites import CoveringFamily, Site
from ..topspace import FinSpace, generate_opens
from ..wtypes import PolyFunctor

KINDS = ("category", "presheaf", "site", "set", "map", "nat", "sig", "space", "relation", "structure", "square", "formula")

_NAME = re.compile(r"^[^\s:=#~]+$")


@dataclass
class Decl:
    kind: str
    name: str
    file: str
    line: int
    head: dict = field(default_factory=dict)
    entries: list = field(default_factory=list)  # (line, kind, payload)


class Workspace:
    """Named, validated objects parsed from description files, one namespace per kind."""

    def __init__(self):
        self.tables: dict[str, dict[str, Any]] = {k: {} for k in KINDS}
        self.origin: dict[tuple[str, str], tuple[str, int]] = {}

    def __len__(self):
        return sum(len(t) for t in self.tables.values())

    def __contains__(self, key):
        kind, name = key
        return name in self.tables[kind]

    def names(self, kind: str) -> list[str]:
        return list(self.tables[kind])

    def get(self, kind: str, name: str | None = None):
        table = self.tables[kind]
        if name is None:
            if len(table) == 1:
                return next(iter(table.values()))
            if not table:
                raise UnknownName(f"no {kind} in the workspace", witness=kind)
            raise UnknownName(f"several {kind} blocks; pick one of {sorted(table)}", witness=sorted(table))
        try:
            return table[name]
        except KeyError:
            raise UnknownName(f"unknown {kind} {name!r}", witness=name) from None

    def summary(self) -> dict:
        return {k: sorted(v) for k, v in self.tables.items() if v}


# ---------------------------------------------------------------- lexing


def _strip(line: str) -> str:
    i = line.find("#")
    return (line if i < 0 else line[:i]).strip()


def _split_colon(text: str, file: str, n: int) -> tuple[str, str]:
    if ":" not in text:
        raise ParseError(f"expected ':' in {text!r}", file, n)
    a, b = text.split(":", 1)
    return a.strip(), b.strip()


def _name(tok: str, file: str, n: int) -> str:
    if not _NAME.match(tok):
        raise ParseError(f"bad name {tok!r}", file, n)
    return tok


def _pairs(text: str, sep: str, file: str, n: int) -> list[tuple[str, str]]:
    """``a -> b c -> d`` or ``a~b c~d`` as a list of pairs."""
    spaced = text.replace(sep, f" {sep} ").split()
    out = []
    i = 0
    while i < len(spaced):
        if i + 2 >= len(spaced) or spaced[i + 1] != sep:
            raise ParseError(f"expected pairs 'x {sep} y' in {text!r}", file, n)
        out.append((spaced[i], spaced[i + 2]))
        i += 3
    return out


class _Reader:
    def __init__(self, file: str):
        self.file = file
        self.stem = os.path.splitext(os.path.basename(file))[0] or "main"
        self.decls: list[Decl] = []
        self.current: dict[str, Decl] = {}
        self.section: str | None = None  # "arrows", "compose", "map" or "nat"

    def open(self, kind: str, name: str, n: int, **head) -> Decl:
        d = Decl(kind, _name(name, self.file, n), self.file, n, dict(head))
        self.decls.append(d)
        self.current[kind] = d
        self.section = None
        return d

    def need(self, kind: str, n: int, implicit: bool = False) -> Decl:
        d = self.current.get(kind)
        if d is None:
            if implicit:
                return self.open(kind, self.stem, n)
            raise ParseError(f"entry outside any {kind} block", self.file, n)
        return d

    def line(self, raw: str, n: int) -> None:
        text = _strip(raw)
        if not text:
            return
        word = text.split()[0]
        key = word.rstrip(":")
        f = self.file
        if key == "category":
            if len(text.split()) != 2:
                raise ParseError("expected 'category NAME'", f, n)
            self.open("category", text.split()[1], n)
        elif key in ("presheaf", "site", "structure"):
            toks = text.split()
            if len(toks) != 4 or toks[2] != "on":
                raise ParseError(f"expected '{key} NAME on CATEGORY'", f, n)
            self.open(key, toks[1], n, on=toks[3])
        elif key in ("set", "space"):
            head, body = _split_colon(text, f, n)
            toks = head.split()
            if len(toks) != 2:
                raise ParseError(f"expected '{key} NAME: elements'", f, n)
            self.open(key, toks[1], n, elements=body.split())
        elif key in ("map", "nat"):
            head, body = _split_colon(text, f, n)
            toks = head.split()
            ends = body.split("->")
            if len(toks) != 2 or len(ends) < 2:
                raise ParseError(f"expected '{key} NAME: DOM -> COD'", f, n)
            dom = ends[0].strip()
            rest = "->".join(ends[1:]).split()
            if len(rest) != 1:
                raise ParseError(f"expected '{key} NAME: DOM -> COD' with the table on the following lines", f, n)
            self.open(key, toks[1], n, dom=dom, cod=rest[0])
            self.section = key
        elif key == "sig":
            head, body = _split_colon(text, f, n)
            toks = head.split()
            ops = []
            for tok in body.split():
                m = re.fullmatch(r"([^\s/]+)/(\d+)", tok)
                if not m:
                    raise ParseError(f"expected 'op/arity', got {tok!r}", f, n)
                ops.append((m.group(1), int(m.group(2))))
            self.open("sig", toks[1] if len(toks) > 1 else self.stem, n, ops=ops)
        elif key == "relation":
            head, body = _split_colon(text, f, n)
            toks = head.split()
            if len(toks) != 4 or toks[2] != "on":
                raise ParseError("expected 'relation NAME on SET: a~b ...'", f, n)
            self.open("relation", toks[1], n, on=toks[3], pairs=_pairs(body, "~", f, n) if body else [])
        elif key == "square":
            head, body = _split_colon(text, f, n)
            toks = head.split()
            maps = body.split()
            if len(toks) != 2 or len(maps) != 4:
                raise ParseError("expected 'square NAME: f g p q'", f, n)
            self.open("square", toks[1], n, maps=maps)
        elif key == "formula":
            head, body = _split_colon(text, f, n)
            toks = head.split()
            if len(toks) != 2 or not body:
                raise ParseError("expected 'formula NAME: text'", f, n)
            self.open("formula", toks[1], n, text=body)
        elif key == "objects":
            _, body = _split_colon(text, f, n)
            self.need("category", n, implicit=True).entries.append((n, "objects", body.split()))
            self.section = None
        elif key in ("arrows", "compose"):
            _, body = _split_colon(text, f, n)
            self.need("category", n, implicit=True)
            self.section = key
            if body:
                self.entry(body, n)
        elif key == "stalk":
            head, body = _split_colon(text, f, n)
            toks = head.split()
            if len(toks) != 2:
                raise ParseError("expected 'stalk OBJECT: elements'", f, n)
            self.need("presheaf", n).entries.append((n, "stalk", (toks[1], body.split())))
        elif key == "act":
            toks = text.split()
            if len(toks) != 5 or toks[3] != "=":
                raise ParseError("expected 'act ARROW ELEM = ELEM'", f, n)
            self.need("presheaf", n).entries.append((n, "act", (toks[1], toks[2], toks[4])))
        elif key == "family":
            head, body = _split_colon(text, f, n)
            toks = head.split()
            if len(toks) != 4 or toks[2] != "on":
                raise ParseError("expected 'family NAME on OBJECT: arrows'", f, n)
            self.need("site", n).entries.append((n, "family", (toks[1], toks[3], body.split())))
        elif key == "open":
            _, body = _split_colon(text, f, n)
            self.need("space", n).entries.append((n, "open", body.split()))
        elif key == "sort":
            toks = text.split()
            if len(toks) != 4 or toks[2] != "=":
                raise ParseError("expected 'sort NAME = OBJECT'", f, n)
            self.need("structure", n).entries.append((n, "sort", (toks[1], toks[3])))
        elif key == "function":
            m = re.fullmatch(r"function\s+(\S+)\s*:\s*(\S+)\s*->\s*(\S+)\s*=\s*(\S+)", text)
            if not m:
                raise ParseError("expected 'function NAME: SORT -> SORT = MAP'", f, n)
            self.need("structure", n).entries.append((n, "function", m.groups()))
        elif key == "predicate":
            m = re.fullmatch(r"predicate\s+(\S+)\s*:\s*(\S+)\s*=(.*)", text)
            if not m:
                raise ParseError("expected 'predicate NAME: SORT = elements'", f, n)
            self.need("structure", n).entries.append((n, "predicate", (m.group(1), m.group(2), m.group(3).split())))
        else:
            self.entry(text, n)

    def entry(self, text: str, n: int) -> None:
        f = self.file
        if self.section == "arrows":
            toks = text.split()
            if len(toks) != 3:
                raise ParseError("expected 'NAME DOM COD'", f, n)
            self.current["category"].entries.append((n, "arrow", tuple(toks)))
        elif self.section == "compose":
            toks = text.split()
            if len(toks) != 4 or toks[2] != "=":
                raise ParseError("expected 'G F = H'", f, n)
            self.current["category"].entries.append((n, "compose", (toks[0], toks[1], toks[3])))
        elif self.section == "map":
            self.current["map"].entries.append((n, "pairs", _pairs(text, "->", f, n)))
        elif self.section == "nat":
            toks = text.split(None, 1)
            if len(toks) != 2:
                raise ParseError("expected 'OBJECT x -> y ...'", f, n)
            self.current["nat"].entries.append((n, "pairs", (toks[0], _pairs(toks[1], "->", f, n))))
        else:
            raise ParseError(f"unrecognised line {text!r}", f, n)


# ---------------------------------------------------------------- resolution


def _ref(ws: Workspace, kind: str, name: str, d: Decl, line: int | None = None):
    try:
        return ws.tables[kind][name]
    except KeyError:
        raise ParseError(f"dangling reference to {kind} {name!r}", d.file, line or d.line) from None


def _invalid(d: Decl, err: PredToposError, line: int | None = None) -> ParseError:
    e = ParseError(f"{d.kind} {d.name}: {err}", d.file, line or d.line)
    e.witness = (d.file, line or d.line, getattr(err, "witness", None))
    return e


def _build_category(d: Decl, validate: bool) -> FiniteCategory:
    objects: list[str] = []
    arrows: dict[str, tuple[str, str]] = {}
    comp: dict[tuple[str, str], str] = {}
    for n, kind, payload in d.entries:
        if kind == "objects":
            for x in payload:
                if x in objects:
                    raise ParseError(f"object {x!r} listed twice", d.file, n)
                objects.append(x)
        elif kind == "arrow":
            a, dom, cod = payload
            if a in arrows:
                raise ParseError(f"arrow {a!r} listed twice", d.file, n)
            for x in (dom, cod):
                if x not in objects:
                    raise ParseError(f"arrow {a!r} refers to unknown object {x!r}", d.file, n)
            arrows[a] = (dom, cod)
    ids = {}
    for x in objects:
        i = f"id_{x}"
        if i in arrows and arrows[i] != (x, x):
            raise ParseError(f"{i!r} must be an endomorphism of {x!r}", d.file, d.line)
        arrows.setdefault(i, (x, x))
        ids[x] = i
    for a, (dom, cod) in arrows.items():
        comp[(ids[cod], a)] = a
        comp[(a, ids[dom])] = a
    for n, kind, payload in d.entries:
        if kind == "compose":
            g, f, h = payload
            for a in payload:
                if a not in arrows:
                    raise ParseError(f"composite refers to unknown arrow {a!r}", d.file, n)
            comp[(g, f)] = h
    cat = FiniteCategory(objects, arrows, comp, ids, name=d.name)
    if validate:
        try:
            validate_category(cat)
        except PredToposError as e:
            raise _invalid(d, e) from None
    return cat


def _build_presheaf(ws: Workspace, d: Decl) -> Presheaf:
    C = _ref(ws, "category", d.head["on"], d)
    stalks: dict[str, list] = {}
    action: dict = {}
    for n, kind, payload in d.entries:
        if kind == "stalk":
            x, elems = payload
            if x not in C.objects:
                raise ParseError(f"dangling reference to object {x!r}", d.file, n)
            if x in stalks:
                raise ParseError(f"stalk at {x!r} given twice", d.file, n)
            stalks[x] = elems
        else:
            a, p, q = payload
            if a not in C.arrows:
                raise ParseError(f"dangling reference to arrow {a!r}", d.file, n)
            action[(a, p)] = q
    try:
        return Presheaf(C, stalks, action, name=d.name)
    except PredToposError as e:
        raise _invalid(d, e) from None


def _build_site(ws: Workspace, d: Decl) -> Site:
    C = _ref(ws, "category", d.head["on"], d)
    cov: dict[str, list] = {x: [] for x in C.objects}
    for n, _, (fname, target, arrows) in d.entries:
        if target not in C.objects:
            raise ParseError(f"dangling reference to object {target!r}", d.file, n)
        for a in arrows:
            if a not in C.arrows:
                raise ParseError(f"dangling reference to arrow {a!r}", d.file, n)
        cov[target].append(CoveringFamily(target, tuple(arrows), name=fname))
    try:
        return Site(C, cov, name=d.name)
    except PredToposError as e:
        raise _invalid(d, e) from None


def _build_map(ws: Workspace, d: Decl) -> FinSetMap:
    A = _ref(ws, "set", d.head["dom"], d)
    B = _ref(ws, "set", d.head["cod"], d)
    table: dict = {}
    for n, _, pairs in d.entries:
        for x, y in pairs:
            if x not in A:
                raise ParseError(f"dangling reference to element {x!r} of {d.head['dom']}", d.file, n)
            if y not in B:
                raise ParseError(f"dangling reference to element {y!r} of {d.head['cod']}", d.file, n)
            if x in table and table[x] != y:
                raise ParseError(f"{x!r} is sent to two elements", d.file, n)
            table[x] = y
    missing = [x for x in A.carrier if x not in table]
    if missing:
        raise ParseError(f"map {d.name} is undefined on {missing[0]!r}", d.file, d.line)
    return FinSetMap(A, B, table)


def _build_nat(ws: Workspace, d: Decl) -> NatTrans:
    P = _ref(ws, "presheaf", d.head["dom"], d)
    Q = _ref(ws, "presheaf", d.head["cod"], d)
    if P.base != Q.base:
        raise ParseError(f"nat {d.name} joins presheaves on different categories", d.file, d.line)
    comps: dict = {x: {} for x in P.base.objects}
    for n, _, (x, pairs) in d.entries:
        if x not in comps:
            raise ParseError(f"dangling reference to object {x!r}", d.file, n)
        for p, q in pairs:
            if p not in P.stalks[x] or q not in Q.stalks[x]:
                raise ParseError(f"dangling reference to element in {p!r} -> {q!r} at {x!r}", d.file, n)
            comps[x][p] = q
    for x in P.base.objects:
        for p in P.stalks[x]:
            if p not in comps[x]:
                raise ParseError(f"nat {d.name} is undefined on {p!r} at {x!r}", d.file, d.line)
    try:
        return NatTrans(P, Q, comps)
    except PredToposError as e:
        raise _invalid(d, e) from None


def _build_space(d: Decl) -> FinSpace:
    pts = d.head["elements"]
    opens = []
    for n, _, U in d.entries:
        for p in U:
            if p not in pts:
                raise ParseError(f"dangling reference to point {p!r}", d.file, n)
        opens.append(U)
    try:
        return FinSpace(pts, generate_opens(pts, opens), name=d.name)
    except PredToposError as e:
        raise _invalid(d, e) from None


def _build_structure(ws: Workspace, d: Decl) -> Structure:
    on = d.head["on"]
    ambient = FinSet() if on == "finset" else FinPsh(_ref(ws, "category", on, d))
    obj_kind = "set" if on == "finset" else "presheaf"
    map_kind = "map" if on == "finset" else "nat"
    sorts, funs, preds = {}, {}, {}
    for n, kind, payload in d.entries:
        if kind == "sort":
            s, obj = payload
            sorts[s] = _ref(ws, obj_kind, obj, d, n)
            if obj_kind == "presheaf" and sorts[s].base.name != on:
                raise ParseError(f"sort {s} lives over {sorts[s].base.name!r}, not {on!r}", d.file, n)
        elif kind == "function":
            fname, a, r, m = payload
            funs[fname] = ((a,), r, _ref(ws, map_kind, m, d, n))
        else:
            pname, a, elems = payload
            if on == "finset":
                preds[pname] = ((a,), list(elems))
            else:
                members: dict[str, list] = {}
                for tok in elems:
                    if ":" not in tok:
                        raise ParseError(f"expected OBJECT:ELEM, got {tok!r}", d.file, n)
                    x, p = tok.split(":", 1)
                    members.setdefault(x, []).append(p)
                preds[pname] = ((a,), members)
    for fname, ((a,), r, _) in funs.items():
        for srt in (a, r):
            if srt not in sorts:
                raise ParseError(f"function {fname} uses unknown sort {srt!r}", d.file, d.line)
    for pname, ((a,), _) in preds.items():
        if a not in sorts:
            raise ParseError(f"predicate {pname} uses unknown sort {a!r}", d.file, d.line)
    try:
        return Structure(ambient, sorts, funs, preds)
    except PredToposError as e:
        raise _invalid(d, e) from None


def _relation_pairs(ws: Workspace, d: Decl):
    X = _ref(ws, "set", d.head["on"], d)
    for a, b in d.head["pairs"]:
        for x in (a, b):
            if x not in X:
                raise ParseError(f"dangling reference to element {x!r}", d.file, d.line)
    R = set(d.head["pairs"])
    missing = next((("reflexive", (x, x)) for x in X if (x, x) not in R), None)
    missing = missing or next((("symmetric", (b, a)) for a, b in sorted(R) if (b, a) not in R), None)
    missing = missing or next((("transitive", (a, c)) for a, b in sorted(R) for b2, c in sorted(R)
                               if b == b2 and (a, c) not in R), None)
    if missing:
        law, (a, b) = missing
        raise ParseError(f"relation {d.name} is not {law}: missing {a}~{b}", d.file, d.line)
    return X, list(d.head["pairs"])


_ORDER = ("category", "set", "sig", "space", "presheaf", "map", "relation", "site", "nat", "square", "structure", "formula")


def parse_text(text: str, file: str = "<input>") -> list[Decl]:
    r = _Reader(file)
    for n, raw in enumerate(text.splitlines(), 1):
        r.line(raw, n)
    return r.decls


def build_workspace(decls: Iterable[Decl], validate_categories: bool = True) -> Workspace:
    ws = Workspace()
    decls = list(decls)
    for d in decls:
        if d.name in ws.tables[d.kind]:
            f, n = ws.origin[(d.kind, d.name)]
            raise DuplicateName(f"{d.kind} {d.name!r} at {d.file}:{d.line} was already defined at {f}:{n}", witness=d.name)
        ws.tables[d.kind][d.name] = None
        ws.origin[(d.kind, d.name)] = (d.file, d.line)
    for kind in _ORDER:
        for d in decls:
            if d.kind != kind:
                continue
            if kind == "category":
                v = _build_category(d, validate_categories)
            elif kind == "set":
                try:
                    v = FinSetObj(tuple(d.head["elements"]))
                except PredToposError as e:
                    raise _invalid(d, e) from None
            elif kind == "sig":
                names = [op for op, _ in d.head["ops"]]
                if len(set(names)) != len(names):
                    raise ParseError("operation listed twice", d.file, d.line)
                v = PolyFunctor.from_arities(dict(d.head["ops"]))
            elif kind == "space":
                v = _build_space(d)
            elif kind == "presheaf":
                v = _build_presheaf(ws, d)
            elif kind == "map":
                v = _build_map(ws, d)
            elif kind == "relation":
                v = _relation_pairs(ws, d)
            elif kind == "site":
                v = _build_site(ws, d)
            elif kind == "nat":
                v = _build_nat(ws, d)
            elif kind == "square":
                try:
                    v = Square(*(_ref_any_map(ws, m, d) for m in d.head["maps"]))
                except PredToposError as e:
                    raise _invalid(d, e) from None
            elif kind == "structure":
                v = _build_structure(ws, d)
            else:
                v = d.head["text"]
            ws.tables[kind][d.name] = v
    return ws


def _ref_any_map(ws: Workspace, name: str, d: Decl):
    if name in ws.tables["map"]:
        return ws.tables["map"][name]
    return _ref(ws, "nat", name, d)


def parse_workspace(files: Iterable[str], validate_categories: bool = True) -> Workspace:
    """Read, resolve and validate every file; later files may refer to earlier ones and vice versa."""
    decls: list[Decl] = []
    for path in files:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ParseError(f"cannot read file: {e.strerror}", path, 0) from None
        decls.extend(parse_text(text, path))
    return build_workspace(decls, validate_categories)


def parse_string(text: str, file: str = "<input>", validate_categories: bool = True) -> Workspace:
    return build_workspace(parse_text(text, file), validate_categories)
