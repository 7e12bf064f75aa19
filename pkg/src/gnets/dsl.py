"""A small textual language for composition terms.

    seq(a, b)            alt(a, b)          iter(a)
    anyseq(a, b)         par(a, b)          disc(a, b; c)
    select(a, b, c)      refine(a, "Op", blockName)
    replace(a, b, c)     empty              a >> b >> c

`>>` is left-associative shorthand for seq; `#` starts a line comment.
Identifiers name registry entries and may contain hyphens.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import algebra
from .errors import ParseError
from .model import Registry, WebService

# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Seq:
    first: object
    second: object


@dataclass(frozen=True)
class Alt:
    first: object
    second: object


@dataclass(frozen=True)
class Iter:
    body: object


@dataclass(frozen=True)
class AnySeq:
    first: object
    second: object


@dataclass(frozen=True)
class Par:
    first: object
    second: object


@dataclass(frozen=True)
class Disc:
    racers: tuple
    continuation: object


@dataclass(frozen=True)
class Select:
    candidates: tuple


@dataclass(frozen=True)
class Refine:
    base: object
    op_name: str
    block: str


@dataclass(frozen=True)
class Replace:
    base: object
    old: object
    new: object


KEYWORDS = {"empty", "seq", "alt", "iter", "anyseq", "par", "disc",
            "select", "refine", "replace"}


# --- Lexer -----------------------------------------------------------------

def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isspace():
            i += 1
            continue
        if text[i:i + 2] == ">>":
            tokens.append((">>", i))
            i += 2
            continue
        if c in "(),;":
            tokens.append((c, i))
            i += 1
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise ParseError(i, "unterminated string literal")
            tokens.append((("STR", text[i + 1:j]), i))
            i = j + 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_-"):
                j += 1
            tokens.append((("IDENT", text[i:j]), i))
            i = j
            continue
        raise ParseError(i, f"unexpected character {c!r}")
    tokens.append(("EOF", n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos][0]

    def here(self):
        return self.tokens[self.pos][1]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok[0]

    def expect(self, kind):
        tok = self.peek()
        if tok != kind:
            shown = "end of input" if tok == "EOF" else repr(tok)
            raise ParseError(self.here(), f"expected {kind!r}, found {shown}")
        return self.next()

    def parse(self):
        e = self.parse_chain()
        self.expect("EOF")
        return e

    def parse_chain(self):
        left = self.parse_primary()
        while self.peek() == ">>":
            self.next()
            left = Seq(left, self.parse_primary())
        return left

    def _args(self, minimum, maximum=None):
        self.expect("(")
        args = [self.parse_chain()]
        while self.peek() == ",":
            self.next()
            args.append(self.parse_chain())
        self.expect(")")
        if len(args) < minimum or (maximum is not None and len(args) > maximum):
            raise ParseError(self.here(), "wrong number of operands")
        return args

    def parse_primary(self):
        tok = self.peek()
        if tok == "(":
            self.next()
            e = self.parse_chain()
            self.expect(")")
            return e
        if not (isinstance(tok, tuple) and tok[0] == "IDENT"):
            shown = "end of input" if tok == "EOF" else repr(tok)
            raise ParseError(self.here(), f"expected a term, found {shown}")
        pos = self.here()
        name = self.next()[1]
        if name == "empty":
            return Empty()
        if name == "seq":
            a, b = self._args(2, 2)
            return Seq(a, b)
        if name == "alt":
            a, b = self._args(2, 2)
            return Alt(a, b)
        if name == "iter":
            (a,) = self._args(1, 1)
            return Iter(a)
        if name == "anyseq":
            a, b = self._args(2, 2)
            return AnySeq(a, b)
        if name == "par":
            a, b = self._args(2, 2)
            return Par(a, b)
        if name == "disc":
            self.expect("(")
            racers = [self.parse_chain()]
            while self.peek() == ",":
                self.next()
                racers.append(self.parse_chain())
            self.expect(";")
            cont = self.parse_chain()
            self.expect(")")
            return Disc(tuple(racers), cont)
        if name == "select":
            return Select(tuple(self._args(1)))
        if name == "refine":
            self.expect("(")
            base = self.parse_chain()
            self.expect(",")
            op = self.peek()
            if not (isinstance(op, tuple) and op[0] == "STR"):
                raise ParseError(self.here(),
                                 "refine expects a quoted operation name")
            op_name = self.next()[1]
            self.expect(",")
            block = self.peek()
            if not (isinstance(block, tuple) and block[0] == "IDENT"):
                raise ParseError(self.here(), "refine expects a block name")
            block_name = self.next()[1]
            self.expect(")")
            return Refine(base, op_name, block_name)
        if name == "replace":
            a, b, c = self._args(3, 3)
            return Replace(a, b, c)
        if name in KEYWORDS:
            raise ParseError(pos, f"misplaced keyword {name!r}")
        return Ref(name)


def parse_expr(text: str):
    return _Parser(text).parse()


def print_expr(e) -> str:
    if isinstance(e, Empty):
        return "empty"
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Seq):
        return f"seq({print_expr(e.first)}, {print_expr(e.second)})"
    if isinstance(e, Alt):
        return f"alt({print_expr(e.first)}, {print_expr(e.second)})"
    if isinstance(e, Iter):
        return f"iter({print_expr(e.body)})"
    if isinstance(e, AnySeq):
        return f"anyseq({print_expr(e.first)}, {print_expr(e.second)})"
    if isinstance(e, Par):
        return f"par({print_expr(e.first)}, {print_expr(e.second)})"
    if isinstance(e, Disc):
        racers = ", ".join(print_expr(r) for r in e.racers)
        return f"disc({racers}; {print_expr(e.continuation)})"
    if isinstance(e, Select):
        return "select(%s)" % ", ".join(print_expr(c) for c in e.candidates)
    if isinstance(e, Refine):
        return f'refine({print_expr(e.base)}, "{e.op_name}", {e.block})'
    if isinstance(e, Replace):
        return (f"replace({print_expr(e.base)}, {print_expr(e.old)}, "
                f"{print_expr(e.new)})")
    raise TypeError(f"not a composition term: {e!r}")


def eval_expr(e, reg: Registry) -> WebService:
    """Evaluate a composition term against a registry.  Intermediate
    composite services are inserted so ISP references resolve by name."""

    def register(ws):
        reg.insert(ws)
        return ws

    def ev(node):
        if isinstance(node, Empty):
            return register(algebra.empty_service())
        if isinstance(node, Ref):
            return reg.lookup(node.name)
        if isinstance(node, Seq):
            return register(algebra.sequence(ev(node.first), ev(node.second)))
        if isinstance(node, Alt):
            return register(algebra.alternative(ev(node.first),
                                                ev(node.second)))
        if isinstance(node, Iter):
            return register(algebra.iteration(ev(node.body)))
        if isinstance(node, AnySeq):
            return register(algebra.arbitrary_sequence(ev(node.first),
                                                       ev(node.second)))
        if isinstance(node, Par):
            return register(algebra.parallel(ev(node.first), ev(node.second)))
        if isinstance(node, Disc):
            racers = [ev(r) for r in node.racers]
            return register(algebra.discriminator(racers,
                                                  ev(node.continuation)))
        if isinstance(node, Select):
            return register(algebra.selection([ev(c)
                                               for c in node.candidates]))
        if isinstance(node, Refine):
            block = reg.lookup_block(node.block)
            return register(algebra.refine(ev(node.base), node.op_name, block))
        if isinstance(node, Replace):
            return register(algebra.replace_service(
                ev(node.base), ev(node.old), ev(node.new)))
        raise TypeError(f"not a composition term: {node!r}")

    return ev(e)
