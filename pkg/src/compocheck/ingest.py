"""Parsing and serialization of component models.

Two surfaces feed the same :class:`~compocheck.model.Model`:

* a small textual DSL (``.csm`` files), one statement per model element::

      interface I { op ping; }
      interface IJ group : I, J {}
      class Worker active : Base {
        realizes I;
        uses J;
        part sub: Helper x2;
        port pIn: I;
        port rOut: J reversed;
        connector self.pIn , sub;
        connector sub , self.rOut via itsJ;
      }
      assoc itsJ ( Worker , J nav );

* a canonical JSON format (``.csm.json``), produced by :func:`serialize_json`
  with stable field ordering so equal models serialize to identical bytes.

Both parsers collect as many errors as they can and raise
:class:`ParseFailure` carrying the list.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .diagnostics import SourceSpan
from .model import (
    Association,
    AssociationEnd,
    Attribute,
    Class,
    ClassKind,
    Connector,
    EndRef,
    Interface,
    Model,
    Part,
    Port,
)

FORMAT_VERSION = 1

_KINDS = {k.value: k for k in ClassKind}
_MULT_RE = re.compile(r"^x(\d+)$")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PUNCT = "{}():,;."


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: str | None = None

    def render(self) -> str:
        hint = f" (expected {self.expected})" if self.expected else ""
        return f"{self.span}: {self.message}{hint}"


class ParseFailure(Exception):
    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("; ".join(e.render() for e in errors))


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "punct", "eof"
    value: str
    line: int
    column: int


def _tokenize(text: str, filename: str) -> tuple[list[_Token], list[ParseError]]:
    tokens: list[_Token] = []
    errors: list[ParseError] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        match = _IDENT_RE.match(text, i)
        if match:
            word = match.group(0)
            tokens.append(_Token("ident", word, line, col))
            i = match.end()
            col += len(word)
            continue
        errors.append(ParseError(SourceSpan(filename, line, col), f"unexpected character {ch!r}"))
        i += 1
        col += 1
    tokens.append(_Token("eof", "", line, col))
    return tokens, errors


class _StatementError(Exception):
    """Internal signal: abandon the current statement and resynchronize."""


class _Parser:
    def __init__(self, tokens: list[_Token], filename: str):
        self.tokens = tokens
        self.filename = filename
        self.pos = 0
        self.errors: list[ParseError] = []

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def span(self, tok: _Token) -> SourceSpan:
        return SourceSpan(self.filename, tok.line, tok.column)

    def fail(self, message: str, expected: str | None = None) -> None:
        tok = self.peek()
        self.errors.append(ParseError(self.span(tok), message, expected))
        raise _StatementError()

    def expect_ident(self, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != "ident":
            shown = tok.value or "end of input"
            self.fail(f"expected {what}, found {shown!r}", what)
        return self.advance()

    def expect_punct(self, value: str) -> _Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.value != value:
            shown = tok.value or "end of input"
            self.fail(f"expected '{value}', found {shown!r}", f"'{value}'")
        return self.advance()

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.value == value

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.value == word

    def eat_keyword(self, word: str) -> bool:
        if self.at_keyword(word):
            self.advance()
            return True
        return False

    def end_statement(self) -> None:
        """Statements close with ';'; the one before '}' may omit it."""
        if self.at_punct(";"):
            self.advance()
        elif not self.at_punct("}"):
            self.fail("statement is not terminated", "';'")

    def sync_statement(self) -> None:
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            if tok.kind == "punct" and tok.value == ";":
                self.advance()
                return
            if tok.kind == "punct" and tok.value == "}":
                return
            self.advance()

    def sync_toplevel(self) -> None:
        depth = 0
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            if depth == 0 and tok.kind == "ident" and tok.value in ("interface", "class", "assoc"):
                return
            if tok.kind == "punct" and tok.value == "{":
                depth += 1
            elif tok.kind == "punct" and tok.value == "}":
                depth = max(0, depth - 1)
                if depth == 0:
                    self.advance()
                    return
            self.advance()

    def name_list(self, what: str) -> list[str]:
        names = [self.expect_ident(what).value]
        while self.at_punct(","):
            self.advance()
            names.append(self.expect_ident(what).value)
        return names

    # Top-level declarations -------------------------------------------------

    def parse_model(self) -> Model:
        model = Model()
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            try:
                if self.eat_keyword("interface"):
                    model.interfaces.append(self.interface_decl())
                elif self.eat_keyword("class"):
                    model.classes.append(self.class_decl())
                elif self.eat_keyword("assoc"):
                    model.associations.append(self.assoc_decl())
                elif self.at_punct(";"):
                    self.advance()
                else:
                    self.fail(f"expected a declaration, found {tok.value!r}",
                              "'interface', 'class' or 'assoc'")
            except _StatementError:
                self.sync_toplevel()
        return model

    def interface_decl(self) -> Interface:
        name_tok = self.expect_ident("interface name")
        iface = Interface(name=name_tok.value, span=self.span(name_tok))
        if self.eat_keyword("group"):
            iface.is_group = True
        if self.at_punct(":"):
            self.advance()
            iface.generals = self.name_list("interface name")
        self.expect_punct("{")
        while not self.at_punct("}"):
            if self.peek().kind == "eof":
                self.fail("interface body is not closed", "'}'")
            try:
                if self.eat_keyword("op"):
                    iface.operations.append(self.expect_ident("operation name").value)
                    self.end_statement()
                else:
                    self.fail(f"expected an operation, found {self.peek().value!r}", "'op'")
            except _StatementError:
                self.sync_statement()
        self.expect_punct("}")
        return iface

    def class_decl(self) -> Class:
        name_tok = self.expect_ident("class name")
        cls = Class(name=name_tok.value, span=self.span(name_tok))
        tok = self.peek()
        if tok.kind == "ident" and tok.value in _KINDS:
            cls.kind = _KINDS[tok.value]
            self.advance()
        if self.at_punct(":"):
            self.advance()
            cls.generals = [self.expect_ident("class name").value]
        self.expect_punct("{")
        while not self.at_punct("}"):
            if self.peek().kind == "eof":
                self.fail("class body is not closed", "'}'")
            try:
                self.class_member(cls)
            except _StatementError:
                self.sync_statement()
        self.expect_punct("}")
        return cls

    def class_member(self, cls: Class) -> None:
        if self.eat_keyword("realizes"):
            cls.realizes.extend(self.name_list("interface name"))
            self.end_statement()
        elif self.eat_keyword("uses"):
            cls.usages.extend(self.name_list("interface name"))
            self.end_statement()
        elif self.eat_keyword("part"):
            name_tok = self.expect_ident("part name")
            self.expect_punct(":")
            type_tok = self.expect_ident("type name")
            multiplicity = 1
            nxt = self.peek()
            if nxt.kind == "ident" and _MULT_RE.match(nxt.value):
                multiplicity = int(_MULT_RE.match(nxt.value).group(1))
                self.advance()
            cls.parts.append(Part(name=name_tok.value, type=type_tok.value,
                                  multiplicity=multiplicity, span=self.span(name_tok)))
            self.end_statement()
        elif self.eat_keyword("port"):
            name_tok = self.expect_ident("port name")
            self.expect_punct(":")
            contract_tok = self.expect_ident("interface name")
            is_reversed = self.eat_keyword("reversed")
            cls.ports.append(Port(name=name_tok.value, contract=contract_tok.value,
                                  reversed=is_reversed, span=self.span(name_tok)))
            self.end_statement()
        elif self.at_keyword("connector"):
            conn_tok = self.advance()
            end1 = self.connector_end()
            self.expect_punct(",")
            end2 = self.connector_end()
            association = None
            if self.eat_keyword("via"):
                association = self.expect_ident("association name").value
            cls.connectors.append(Connector(end1=end1, end2=end2, association=association,
                                            span=self.span(conn_tok)))
            self.end_statement()
        else:
            self.fail(f"expected a class member, found {self.peek().value!r}",
                      "'realizes', 'uses', 'part', 'port' or 'connector'")

    def connector_end(self) -> EndRef:
        head = self.expect_ident("part name, or 'self'")
        if head.value == "self":
            self.expect_punct(".")
            port = self.expect_ident("port name")
            return EndRef(part=None, port=port.value)
        if self.at_punct("."):
            self.advance()
            port = self.expect_ident("port name")
            return EndRef(part=head.value, port=port.value)
        return EndRef(part=head.value, port=None)

    def assoc_decl(self) -> Association:
        name_tok = self.expect_ident("association name")
        self.expect_punct("(")
        end1 = self.assoc_end()
        self.expect_punct(",")
        end2 = self.assoc_end()
        self.expect_punct(")")
        if self.at_punct(";"):
            self.advance()
        return Association(name=name_tok.value, end1=end1, end2=end2, span=self.span(name_tok))

    def assoc_end(self) -> AssociationEnd:
        type_tok = self.expect_ident("classifier name")
        navigable = self.eat_keyword("nav")
        return AssociationEnd(type=type_tok.value, navigable=navigable)


def parse_dsl(text: str, filename: str = "<dsl>") -> Model:
    """Parse DSL text into a model; raises :class:`ParseFailure` with every
    error found (recovery resumes at statement boundaries)."""
    tokens, lex_errors = _tokenize(text, filename)
    parser = _Parser(tokens, filename)
    model = parser.parse_model()
    errors = lex_errors + parser.errors
    if errors:
        errors.sort(key=lambda e: (e.span.line, e.span.column))
        raise ParseFailure(errors)
    return model


# JSON interchange -----------------------------------------------------------


class _JsonReader:
    def __init__(self, filename: str):
        self.filename = filename
        self.errors: list[ParseError] = []

    def err(self, path: str, message: str) -> None:
        self.errors.append(ParseError(SourceSpan(self.filename, 1, 1), f"{path}: {message}"))

    def str_field(self, obj: dict, key: str, path: str, default: str | None = None) -> str | None:
        value = obj.get(key, default)
        if value is default:
            if default is None and key not in obj:
                self.err(path, f"missing required field '{key}'")
            return default
        if not isinstance(value, str):
            self.err(path, f"field '{key}' must be a string")
            return default
        return value

    def list_field(self, obj: dict, key: str, path: str) -> list:
        value = obj.get(key, [])
        if not isinstance(value, list):
            self.err(path, f"field '{key}' must be an array")
            return []
        return value

    def str_list(self, obj: dict, key: str, path: str) -> list[str]:
        out = []
        for i, item in enumerate(self.list_field(obj, key, path)):
            if isinstance(item, str):
                out.append(item)
            else:
                self.err(f"{path}.{key}[{i}]", "must be a string")
        return out


def parse_json(text: str, filename: str = "<json>") -> Model:
    """Parse the canonical JSON format; raises :class:`ParseFailure` on
    malformed JSON or schema violations. Synthesized associations present in
    the input are skipped (re-synthesis recreates them)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseFailure([ParseError(SourceSpan(filename, exc.lineno, exc.colno),
                                       f"malformed JSON: {exc.msg}")]) from exc
    reader = _JsonReader(filename)
    if not isinstance(data, dict):
        raise ParseFailure([ParseError(SourceSpan(filename, 1, 1),
                                       "top level must be an object")])
    version = data.get("formatVersion", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        reader.err("$", f"unsupported formatVersion {version!r} (expected {FORMAT_VERSION})")
    model = Model()
    for i, raw in enumerate(reader.list_field(data, "interfaces", "$")):
        path = f"$.interfaces[{i}]"
        if not isinstance(raw, dict):
            reader.err(path, "must be an object")
            continue
        name = reader.str_field(raw, "name", path)
        if name is None:
            continue
        group = raw.get("group", False)
        if not isinstance(group, bool):
            reader.err(path, "field 'group' must be a boolean")
            group = False
        model.interfaces.append(Interface(
            name=name,
            generals=reader.str_list(raw, "generals", path),
            is_group=group,
            operations=reader.str_list(raw, "operations", path),
        ))
    for i, raw in enumerate(reader.list_field(data, "classes", "$")):
        path = f"$.classes[{i}]"
        if not isinstance(raw, dict):
            reader.err(path, "must be an object")
            continue
        name = reader.str_field(raw, "name", path)
        if name is None:
            continue
        kind_text = reader.str_field(raw, "kind", path, ClassKind.PASSIVE.value)
        if kind_text not in _KINDS:
            reader.err(path, f"unknown class kind {kind_text!r}")
            kind_text = ClassKind.PASSIVE.value
        cls = Class(name=name, kind=_KINDS[kind_text],
                    generals=reader.str_list(raw, "generals", path),
                    realizes=reader.str_list(raw, "realizes", path),
                    usages=reader.str_list(raw, "uses", path))
        for j, attr in enumerate(reader.list_field(raw, "attributes", path)):
            apath = f"{path}.attributes[{j}]"
            if not isinstance(attr, dict):
                reader.err(apath, "must be an object")
                continue
            aname = reader.str_field(attr, "name", apath)
            atype = reader.str_field(attr, "type", apath)
            if aname is not None and atype is not None:
                cls.attributes.append(Attribute(aname, atype))
        for j, part in enumerate(reader.list_field(raw, "parts", path)):
            ppath = f"{path}.parts[{j}]"
            if not isinstance(part, dict):
                reader.err(ppath, "must be an object")
                continue
            pname = reader.str_field(part, "name", ppath)
            ptype = reader.str_field(part, "type", ppath)
            mult = part.get("multiplicity", 1)
            if not isinstance(mult, int) or isinstance(mult, bool):
                reader.err(ppath, "field 'multiplicity' must be an integer")
                mult = 1
            if pname is not None and ptype is not None:
                cls.parts.append(Part(name=pname, type=ptype, multiplicity=mult))
        for j, port in enumerate(reader.list_field(raw, "ports", path)):
            ppath = f"{path}.ports[{j}]"
            if not isinstance(port, dict):
                reader.err(ppath, "must be an object")
                continue
            pname = reader.str_field(port, "name", ppath)
            contract = reader.str_field(port, "contract", ppath)
            rev = port.get("reversed", False)
            if not isinstance(rev, bool):
                reader.err(ppath, "field 'reversed' must be a boolean")
                rev = False
            if pname is not None and contract is not None:
                cls.ports.append(Port(name=pname, contract=contract, reversed=rev))
        for j, conn in enumerate(reader.list_field(raw, "connectors", path)):
            cpath = f"{path}.connectors[{j}]"
            if not isinstance(conn, dict):
                reader.err(cpath, "must be an object")
                continue
            ends = []
            for key in ("end1", "end2"):
                raw_end = conn.get(key)
                if not isinstance(raw_end, dict):
                    reader.err(cpath, f"field '{key}' must be an object")
                    raw_end = {}
                part_name = raw_end.get("part")
                port_name = raw_end.get("port")
                if part_name is not None and not isinstance(part_name, str):
                    reader.err(cpath, f"'{key}.part' must be a string")
                    part_name = None
                if port_name is not None and not isinstance(port_name, str):
                    reader.err(cpath, f"'{key}.port' must be a string")
                    port_name = None
                ends.append(EndRef(part=part_name, port=port_name))
            association = conn.get("association")
            if association is not None and not isinstance(association, str):
                reader.err(cpath, "'association' must be a string")
                association = None
            cls.connectors.append(Connector(end1=ends[0], end2=ends[1], association=association))
        model.classes.append(cls)
    for i, raw in enumerate(reader.list_field(data, "associations", "$")):
        path = f"$.associations[{i}]"
        if not isinstance(raw, dict):
            reader.err(path, "must be an object")
            continue
        if raw.get("synthesized") is True:
            continue
        name = reader.str_field(raw, "name", path)
        if name is None:
            continue
        ends = []
        for key in ("end1", "end2"):
            raw_end = raw.get(key)
            if not isinstance(raw_end, dict):
                reader.err(path, f"field '{key}' must be an object")
                raw_end = {"type": "?"}
            etype = reader.str_field(raw_end, "type", f"{path}.{key}")
            nav = raw_end.get("navigable", False)
            if not isinstance(nav, bool):
                reader.err(path, f"'{key}.navigable' must be a boolean")
                nav = False
            ends.append(AssociationEnd(type=etype if etype is not None else "?", navigable=nav))
        model.associations.append(Association(name=name, end1=ends[0], end2=ends[1]))
    root = data.get("root")
    if root is not None:
        if isinstance(root, str):
            model.root = root
        else:
            reader.err("$", "field 'root' must be a string")
    if reader.errors:
        raise ParseFailure(reader.errors)
    return model


def model_to_dict(model: Model) -> dict:
    """The canonical JSON object form of a model (fixed key order)."""
    doc: dict = {"formatVersion": FORMAT_VERSION}
    doc["interfaces"] = [
        {
            "name": i.name,
            "group": i.is_group,
            "generals": list(i.generals),
            "operations": list(i.operations),
        }
        for i in model.interfaces
    ]
    classes = []
    for cls in model.classes:
        entry: dict = {
            "name": cls.name,
            "kind": cls.kind.value,
            "generals": list(cls.generals),
            "realizes": list(cls.realizes),
            "uses": list(cls.usages),
            "attributes": [{"name": a.name, "type": a.type} for a in cls.attributes],
            "parts": [{"name": p.name, "type": p.type, "multiplicity": p.multiplicity}
                      for p in cls.parts],
            "ports": [{"name": p.name, "contract": p.contract, "reversed": p.reversed}
                      for p in cls.ports],
        }
        connectors = []
        for conn in cls.connectors:
            centry: dict = {}
            for key, ref in (("end1", conn.end1), ("end2", conn.end2)):
                end: dict = {}
                if ref.part is not None:
                    end["part"] = ref.part
                if ref.port is not None:
                    end["port"] = ref.port
                centry[key] = end
            if conn.association is not None:
                centry["association"] = conn.association
            connectors.append(centry)
        entry["connectors"] = connectors
        classes.append(entry)
    doc["classes"] = classes
    associations = []
    for assoc in model.associations:
        aentry: dict = {
            "name": assoc.name,
            "end1": {"type": assoc.end1.type, "navigable": assoc.end1.navigable},
            "end2": {"type": assoc.end2.type, "navigable": assoc.end2.navigable},
        }
        if assoc.is_deleg_default:
            aentry["synthesized"] = True
        associations.append(aentry)
    doc["associations"] = associations
    if model.root is not None:
        doc["root"] = model.root
    return doc


def serialize_json(model: Model) -> str:
    """Serialize to the canonical JSON format: same model, same bytes."""
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def detect_format(filename: str) -> str:
    return "json" if filename.endswith(".json") else "dsl"


def parse_auto(text: str, filename: str, fmt: str = "auto") -> Model:
    if fmt == "auto":
        fmt = detect_format(filename)
    if fmt == "json":
        return parse_json(text, filename)
    return parse_dsl(text, filename)
