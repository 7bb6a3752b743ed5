"""Predicate algebra: AST nodes, fluent builders, and the textual query grammar.

Grammar (see README for the full EBNF): `&`/`,` combine conjunctively, `|`
disjunctively, `!` negates; `!` binds tighter than `&`, which binds tighter
than `|`. String literals are double-quoted with backslash escapes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import css as csslib
from .colorlens import CSS_COLORS, ColorSpec, Dominance, Tolerance, name_to_rgb
from .errors import QuerySyntaxError, UnknownPredicateError
from .geometry import Dir


class ElementKind(Enum):
    TEXT = "text"
    HEADLINE = "headline"
    CLICKABLE = "clickable"
    TYPABLE = "typable"
    CHECKABLE = "checkable"
    CHOOSABLE = "choosable"
    DATEPICKER = "datepicker"
    SUBMITTABLE = "submittable"
    IMAGE = "image"
    LIST = "list"
    TABLE = "table"


class DirMode(Enum):
    SINGLE = "single"
    ANY = "any"
    ALL = "all"


class Predicate:
    """Base AST node. `&`, `|` and `~` compose nodes the way the grammar does."""

    def __and__(self, other: "Predicate") -> "Predicate":
        left = self.children if isinstance(self, And) else (self,)
        right = other.children if isinstance(other, And) else (other,)
        return And(left + right)

    def __or__(self, other: "Predicate") -> "Predicate":
        left = self.children if isinstance(self, Or) else (self,)
        right = other.children if isinstance(other, Or) else (other,)
        return Or(left + right)

    def __invert__(self) -> "Predicate":
        return Not(self)


@dataclass(frozen=True)
class Kind(Predicate):
    kind: ElementKind
    text: str | None = None


@dataclass(frozen=True)
class Contains(Predicate):
    text: str


@dataclass(frozen=True)
class Direction(Predicate):
    direction: Dir
    mode: DirMode
    inner: Predicate
    max_distance: float | None = None


@dataclass(frozen=True)
class Color(Predicate):
    spec: ColorSpec


@dataclass(frozen=True)
class And(Predicate):
    children: tuple[Predicate, ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("And needs at least 2 children")


@dataclass(frozen=True)
class Or(Predicate):
    children: tuple[Predicate, ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("Or needs at least 2 children")


@dataclass(frozen=True)
class Not(Predicate):
    child: Predicate


@dataclass(frozen=True)
class Css(Predicate):
    selector: csslib.CssSelector


# --- fluent builders ----------------------------------------------------------

def _kind(kind: ElementKind):
    def build(text: str | None = None) -> Kind:
        return Kind(kind, text)
    build.__name__ = kind.value
    build.__doc__ = f"Predicate matching {kind.value} elements, optionally filtered by text."
    return build


text = _kind(ElementKind.TEXT)
headline = _kind(ElementKind.HEADLINE)
clickable = _kind(ElementKind.CLICKABLE)
typable = _kind(ElementKind.TYPABLE)
checkable = _kind(ElementKind.CHECKABLE)
choosable = _kind(ElementKind.CHOOSABLE)
datepicker = _kind(ElementKind.DATEPICKER)
submittable = _kind(ElementKind.SUBMITTABLE)
image = _kind(ElementKind.IMAGE)
list_ = _kind(ElementKind.LIST)
table = _kind(ElementKind.TABLE)


def contains(text: str) -> Contains:
    return Contains(text)


def _coerce(p: Predicate | str) -> Predicate:
    # A bare string as a direction reference means "elements containing it".
    return Contains(p) if isinstance(p, str) else p


def _dir(direction: Dir, mode: DirMode):
    def build(inner: Predicate | str, max_distance: float | None = None) -> Direction:
        return Direction(direction, mode, _coerce(inner), max_distance)
    suffix = "" if mode is DirMode.SINGLE else mode.value
    build.__name__ = direction.value + suffix
    return build


below = _dir(Dir.BELOW, DirMode.SINGLE)
below_any = _dir(Dir.BELOW, DirMode.ANY)
below_all = _dir(Dir.BELOW, DirMode.ALL)
above = _dir(Dir.ABOVE, DirMode.SINGLE)
above_any = _dir(Dir.ABOVE, DirMode.ANY)
above_all = _dir(Dir.ABOVE, DirMode.ALL)
left_of = _dir(Dir.LEFT_OF, DirMode.SINGLE)
left_of_any = _dir(Dir.LEFT_OF, DirMode.ANY)
left_of_all = _dir(Dir.LEFT_OF, DirMode.ALL)
right_of = _dir(Dir.RIGHT_OF, DirMode.SINGLE)
right_of_any = _dir(Dir.RIGHT_OF, DirMode.ANY)
right_of_all = _dir(Dir.RIGHT_OF, DirMode.ALL)


def color(
    value: str | tuple[int, int, int],
    tolerance: Tolerance = Tolerance.DEFAULT,
    dominance: Dominance = Dominance.DEFAULT,
) -> Color:
    if isinstance(value, str):
        return Color(ColorSpec(name_to_rgb(value), tolerance, dominance, name=value.lower()))
    return Color(ColorSpec(tuple(value), tolerance, dominance))


def css(selector: str) -> Css:
    return Css(csslib.parse_css(selector))


def and_(*predicates: Predicate) -> And:
    return And(tuple(predicates))


def or_(*predicates: Predicate) -> Or:
    return Or(tuple(predicates))


def not_(predicate: Predicate) -> Not:
    return Not(predicate)


# --- tokenizer ----------------------------------------------------------------

_KIND_NAMES = {k.value: k for k in ElementKind}
_DIR_NAMES: dict[str, tuple[Dir, DirMode]] = {}
for _d in Dir:
    _DIR_NAMES[_d.value] = (_d, DirMode.SINGLE)
    _DIR_NAMES[_d.value + "any"] = (_d, DirMode.ANY)
    _DIR_NAMES[_d.value + "all"] = (_d, DirMode.ALL)
_LEVEL_NAMES = {"low": 0, "default": 1, "high": 2}


@dataclass
class _Token:
    type: str  # IDENT STRING NUMBER AND OR NOT LPAREN RPAREN COMMA EOF
    value: str
    pos: int  # character position; byte offset derived on error


class _Lexer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.tokens: list[_Token] = []
        self._run()

    def _byte_offset(self, pos: int) -> int:
        return len(self.source[:pos].encode("utf-8"))

    def error(self, message: str, pos: int, expected: frozenset[str] = frozenset()) -> QuerySyntaxError:
        return QuerySyntaxError(message, self._byte_offset(pos), expected)

    def _run(self) -> None:
        src = self.source
        i = 0
        while i < len(src):
            ch = src[i]
            if ch.isspace():
                i += 1
                continue
            if ch == "&":
                self.tokens.append(_Token("AND", ch, i)); i += 1
            elif ch == ",":
                self.tokens.append(_Token("COMMA", ch, i)); i += 1
            elif ch == "|":
                self.tokens.append(_Token("OR", ch, i)); i += 1
            elif ch == "!":
                self.tokens.append(_Token("NOT", ch, i)); i += 1
            elif ch == "(":
                self.tokens.append(_Token("LPAREN", ch, i)); i += 1
            elif ch == ")":
                self.tokens.append(_Token("RPAREN", ch, i)); i += 1
            elif ch == '"':
                i = self._string(i)
            elif ch.isdigit() or (ch == "." and i + 1 < len(src) and src[i + 1].isdigit()):
                start = i
                while i < len(src) and (src[i].isdigit() or src[i] == "."):
                    i += 1
                self.tokens.append(_Token("NUMBER", src[start:i], start))
            elif ch.isalpha() or ch == "_":
                start = i
                while i < len(src) and (src[i].isalnum() or src[i] == "_"):
                    i += 1
                self.tokens.append(_Token("IDENT", src[start:i], start))
            else:
                raise self.error(f"unexpected character {ch!r}", i)
        self.tokens.append(_Token("EOF", "", len(src)))

    def _string(self, i: int) -> int:
        src = self.source
        start = i
        i += 1
        out: list[str] = []
        while i < len(src):
            ch = src[i]
            if ch == '"':
                self.tokens.append(_Token("STRING", "".join(out), start))
                return i + 1
            if ch == "\\":
                i += 1
                if i >= len(src):
                    break
                esc = src[i]
                out.append({"n": "\n", "t": "\t", "r": "\r"}.get(esc, esc))
            else:
                out.append(ch)
            i += 1
        raise self.error("unterminated string literal", start, frozenset(['"']))


class _Parser:
    def __init__(self, source: str):
        self.lexer = _Lexer(source)
        self.tokens = self.lexer.tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def _fail(self, expected: frozenset[str]) -> QuerySyntaxError:
        tok = self.cur
        what = "end of input" if tok.type == "EOF" else repr(tok.value)
        return self.lexer.error(f"unexpected {what}", tok.pos, expected)

    def expect(self, type_: str, expected_label: str) -> _Token:
        if self.cur.type != type_:
            raise self._fail(frozenset([expected_label]))
        tok = self.cur
        self.i += 1
        return tok

    def parse(self) -> Predicate:
        node = self.parse_or()
        if self.cur.type != "EOF":
            raise self._fail(frozenset(["'&'", "'|'", "end of input"]))
        return node

    def parse_or(self) -> Predicate:
        nodes = [self.parse_and()]
        while self.cur.type == "OR":
            self.i += 1
            nodes.append(self.parse_and())
        return nodes[0] if len(nodes) == 1 else Or(tuple(nodes))

    def parse_and(self) -> Predicate:
        nodes = [self.parse_unary()]
        while self.cur.type in ("AND", "COMMA"):
            # A comma before a number is a direction max-distance argument,
            # not an And separator (predicates never start with a number).
            if self.cur.type == "COMMA" and self.tokens[self.i + 1].type == "NUMBER":
                break
            self.i += 1
            nodes.append(self.parse_unary())
        return nodes[0] if len(nodes) == 1 else And(tuple(nodes))

    def parse_unary(self) -> Predicate:
        if self.cur.type == "NOT":
            self.i += 1
            return Not(self.parse_unary())
        return self.parse_prim()

    def parse_prim(self) -> Predicate:
        tok = self.cur
        if tok.type == "LPAREN":
            self.i += 1
            node = self.parse_or()
            self.expect("RPAREN", "')'")
            return node
        if tok.type != "IDENT":
            raise self._fail(frozenset(["predicate", "'('", "'!'"]))
        name = tok.value.lower()
        self.i += 1
        if name in _KIND_NAMES:
            return self._parse_kind(_KIND_NAMES[name])
        if name in _DIR_NAMES:
            return self._parse_direction(*_DIR_NAMES[name])
        if name == "contains":
            self.expect("LPAREN", "'('")
            s = self.expect("STRING", "string").value
            self.expect("RPAREN", "')'")
            return Contains(s)
        if name == "color":
            return self._parse_color()
        if name == "css":
            self.expect("LPAREN", "'('")
            s = self.expect("STRING", "string")
            self.expect("RPAREN", "')'")
            try:
                return Css(csslib.parse_css(s.value))
            except Exception as exc:
                raise self.lexer.error(f"bad css selector: {exc}", s.pos) from exc
        raise UnknownPredicateError(tok.value, self.lexer._byte_offset(tok.pos))

    def _parse_kind(self, kind: ElementKind) -> Kind:
        if self.cur.type != "LPAREN":
            return Kind(kind)  # bare name, e.g. `headline`
        self.i += 1
        text_arg: str | None = None
        if self.cur.type == "STRING":
            text_arg = self.cur.value
            self.i += 1
        self.expect("RPAREN", "')'")
        return Kind(kind, text_arg)

    def _parse_direction(self, direction: Dir, mode: DirMode) -> Direction:
        self.expect("LPAREN", "'('")
        inner = self.parse_or()
        max_distance: float | None = None
        if self.cur.type == "COMMA":
            self.i += 1
            num = self.expect("NUMBER", "number")
            try:
                max_distance = float(num.value)
            except ValueError:
                raise self.lexer.error(f"bad number {num.value!r}", num.pos) from None
        self.expect("RPAREN", "')'")
        return Direction(direction, mode, inner, max_distance)

    def _parse_color(self) -> Color:
        self.expect("LPAREN", "'('")
        tok = self.cur
        if tok.type == "IDENT" and tok.value.lower() == "rgb":
            # Extension beyond named colors: rgb(r, g, b) literal.
            self.i += 1
            self.expect("LPAREN", "'('")
            channels: list[int] = []
            for n in range(3):
                if n:
                    self.expect("COMMA", "','")
                num = self.expect("NUMBER", "number")
                channels.append(int(float(num.value)))
            self.expect("RPAREN", "')'")
            rgb = (channels[0], channels[1], channels[2])
            name = None
        elif tok.type == "IDENT":
            self.i += 1
            try:
                rgb = name_to_rgb(tok.value)
            except Exception as exc:
                raise self.lexer.error(str(exc), tok.pos) from exc
            name = tok.value.lower()
        else:
            raise self._fail(frozenset(["color name", "rgb("]))
        tolerance, dominance = Tolerance.DEFAULT, Dominance.DEFAULT
        if self.cur.type == "COMMA":
            self.i += 1
            tolerance = Tolerance(self._level("tolerance"))
            if self.cur.type == "COMMA":
                self.i += 1
                dominance = Dominance(self._level("dominance"))
        self.expect("RPAREN", "')'")
        try:
            spec = ColorSpec(rgb, tolerance, dominance, name=name)
        except ValueError as exc:
            raise self.lexer.error(str(exc), tok.pos) from exc
        return Color(spec)

    def _level(self, what: str) -> str:
        tok = self.expect("IDENT", f"{what} level (low/default/high)")
        if tok.value.lower() not in _LEVEL_NAMES:
            raise self.lexer.error(
                f"bad {what} level {tok.value!r}", tok.pos, frozenset(["low", "default", "high"])
            )
        return tok.value.lower()


def parse_query(source: str) -> Predicate:
    """Parse a textual query into its predicate AST."""
    return _Parser(source).parse()


# --- pretty printer -----------------------------------------------------------

def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


_RGB_TO_NAME: dict[tuple[int, int, int], str] = {}
for _name, _rgb in CSS_COLORS.items():
    _RGB_TO_NAME.setdefault(_rgb, _name)


def _fmt_number(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)


def pretty_print(predicate: Predicate) -> str:
    """Canonical textual form; parse_query(pretty_print(p)) reproduces p."""
    return _pp(predicate, parent="top")


def _pp(p: Predicate, parent: str) -> str:
    if isinstance(p, Kind):
        return f"{p.kind.value}({_quote(p.text)})" if p.text is not None else f"{p.kind.value}()"
    if isinstance(p, Contains):
        return f"contains({_quote(p.text)})"
    if isinstance(p, Direction):
        suffix = "" if p.mode is DirMode.SINGLE else p.mode.value
        inner = _pp(p.inner, parent="top")
        arg = inner if p.max_distance is None else f"{inner}, {_fmt_number(p.max_distance)}"
        return f"{p.direction.value}{suffix}({arg})"
    if isinstance(p, Color):
        spec = p.spec
        name = spec.name or _RGB_TO_NAME.get(spec.rgb)
        head = name if name else f"rgb({spec.rgb[0]}, {spec.rgb[1]}, {spec.rgb[2]})"
        if spec.tolerance is Tolerance.DEFAULT and spec.dominance is Dominance.DEFAULT:
            return f"color({head})"
        return f"color({head}, {spec.tolerance.value}, {spec.dominance.value})"
    if isinstance(p, Css):
        return f"css({_quote(csslib.css_to_string(p.selector))})"
    if isinstance(p, Not):
        inner = _pp(p.child, parent="not")
        if isinstance(p.child, (And, Or)):
            inner = f"({inner})"
        return f"!{inner}"
    if isinstance(p, And):
        parts = []
        for c in p.children:
            s = _pp(c, parent="and")
            if isinstance(c, (And, Or)):
                s = f"({s})"
            parts.append(s)
        out = " & ".join(parts)
        return out
    if isinstance(p, Or):
        parts = []
        for c in p.children:
            s = _pp(c, parent="or")
            if isinstance(c, Or):
                s = f"({s})"
            parts.append(s)
        return " | ".join(parts)
    raise TypeError(f"not a predicate: {p!r}")
