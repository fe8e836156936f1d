"""Text format for choreography programs.

    def X0(0, 1) = 1.zero -> 0.xx; call X1
    def X1(0) = end
    main = 1.this -> 0.xx; if 0 ? compare then { end } else { call X0 }

One `def` per procedure with its process annotation in parentheses, then a
mandatory `main`.  A chain is `;`-separated communications ending in
`end`, `call Xn`, or an `if`; selections are written `p -> q[left]`.
Only source programs are expressible: runtime call terms have no syntax.
Parsing never checks well-formedness; that is a separate pass.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .concrete import COMPARE, EXPRESSIONS, XX, YY
from .core import (
    END,
    Call,
    Choreography,
    Com,
    Cond,
    DefSet,
    Interaction,
    Label,
    Program,
    RTCall,
    Sel,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # "int" | "name" | "sym"
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<int>\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>->|[.;=(){}\[\],?])"
)


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("sym", "", 1, 1)
            return ParseError(message + ", found end of input", last.line, last.col)
        return ParseError(f"{message}, found {tok.text!r}", tok.line, tok.col)

    def take(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text is not None else kind
            raise self.error(f"expected {want}")
        self.pos += 1
        return tok

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return (
            tok is not None
            and tok.kind == kind
            and (text is None or tok.text == text)
        )

    def nat(self) -> int:
        return int(self.take("int").text)

    def proc_name(self) -> int:
        tok = self.take("name")
        m = re.fullmatch(r"X(\d+)", tok.text)
        if m is None:
            raise ParseError(
                f"procedure names look like X0, X1, ..., found {tok.text!r}",
                tok.line,
                tok.col,
            )
        return int(m.group(1))

    def chor(self) -> Choreography:
        if self.at("name", "end"):
            self.take("name")
            return END
        if self.at("name", "call"):
            self.take("name")
            return Call(self.proc_name())
        if self.at("name", "if"):
            self.take("name")
            p = self.nat()
            self.take("sym", "?")
            self.take("name", "compare")
            self.take("name", "then")
            self.take("sym", "{")
            then_branch = self.chor()
            self.take("sym", "}")
            self.take("name", "else")
            self.take("sym", "{")
            else_branch = self.chor()
            self.take("sym", "}")
            return Cond(p, COMPARE, then_branch, else_branch)
        if self.at("int"):
            p = self.nat()
            if self.at("sym", "."):
                self.take("sym", ".")
                tok = self.take("name")
                if tok.text not in EXPRESSIONS:
                    raise ParseError(
                        f"expected an expression (this, zero, succ), found {tok.text!r}",
                        tok.line,
                        tok.col,
                    )
                expr = tok.text
                self.take("sym", "->")
                q = self.nat()
                self.take("sym", ".")
                var_tok = self.take("name")
                if var_tok.text not in (XX, YY):
                    raise ParseError(
                        f"expected a variable (xx, yy), found {var_tok.text!r}",
                        var_tok.line,
                        var_tok.col,
                    )
                eta = Com(p, expr, q, var_tok.text)
            else:
                self.take("sym", "->")
                q = self.nat()
                self.take("sym", "[")
                lab = self.take("name")
                if lab.text not in ("left", "right"):
                    raise ParseError(
                        f"expected a label (left, right), found {lab.text!r}",
                        lab.line,
                        lab.col,
                    )
                self.take("sym", "]")
                eta = Sel(p, q, Label(lab.text))
            self.take("sym", ";")
            return Interaction(eta, self.chor())
        raise self.error("expected a choreography")

    def program(self) -> Program:
        procs = {}
        while self.at("name", "def"):
            self.take("name")
            name = self.proc_name()
            if name in procs:
                tok = self.tokens[self.pos - 1]
                raise ParseError(f"procedure X{name} defined twice", tok.line, tok.col)
            self.take("sym", "(")
            ann = []
            if not self.at("sym", ")"):
                ann.append(self.nat())
                while self.at("sym", ","):
                    self.take("sym", ",")
                    ann.append(self.nat())
            self.take("sym", ")")
            self.take("sym", "=")
            procs[name] = (frozenset(ann), self.chor())
        self.take("name", "main")
        self.take("sym", "=")
        main = self.chor()
        if self.peek() is not None:
            raise self.error("expected end of input")
        return Program(DefSet(procs), main)


def parse_program(text: str) -> Program:
    return _Parser(text).program()


# ---------------------------------------------------------------------------
# Pretty-printing


def format_choreography(chor: Choreography) -> str:
    if chor == END:
        return "end"
    if isinstance(chor, Call):
        return f"call X{chor.name}"
    if isinstance(chor, Cond):
        return (
            f"if {chor.process} ? compare"
            f" then {{ {format_choreography(chor.then_branch)} }}"
            f" else {{ {format_choreography(chor.else_branch)} }}"
        )
    if isinstance(chor, Interaction):
        eta = chor.eta
        if isinstance(eta, Com):
            head = f"{eta.sender}.{eta.expr} -> {eta.receiver}.{eta.var}"
        else:
            head = f"{eta.sender} -> {eta.receiver}[{eta.label.value}]"
        return f"{head}; {format_choreography(chor.cont)}"
    if isinstance(chor, RTCall):
        raise ValueError("runtime call terms have no surface syntax")
    raise TypeError(f"not a choreography: {chor!r}")


def format_program(program: Program) -> str:
    lines = []
    for name, (ann, body) in sorted(program.procedures.items()):
        processes = ", ".join(str(p) for p in sorted(ann))
        lines.append(f"def X{name}({processes}) = {format_choreography(body)}")
    lines.append(f"main = {format_choreography(program.main)}")
    return "\n".join(lines) + "\n"
