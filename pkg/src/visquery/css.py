"""CSS selector subset for backwards-compatible querying.

Supported: tag, #id, .class, [attr], [attr=value], descendant (space) and
child (>) combinators, comma-separated groups. Pseudo-classes/-elements and
sibling combinators are rejected with a distinct unsupported-feature error.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CssSyntaxError, CssUnsupportedError
from .snapshot import Element, PageSnapshot


@dataclass(frozen=True)
class AttrTest:
    name: str
    value: str | None = None  # None = presence test


@dataclass(frozen=True)
class Compound:
    tag: str | None = None  # None matches any tag
    id: str | None = None
    classes: tuple[str, ...] = ()
    attrs: tuple[AttrTest, ...] = ()
    universal: bool = False  # explicit '*'

    def is_empty(self) -> bool:
        return (
            self.tag is None and self.id is None and not self.classes
            and not self.attrs and not self.universal
        )


@dataclass(frozen=True)
class Chain:
    """Compounds joined right-to-left by combinators (' ' or '>')."""

    compounds: tuple[Compound, ...]
    combinators: tuple[str, ...]  # len(compounds) - 1 entries


@dataclass(frozen=True)
class CssSelector:
    groups: tuple[Chain, ...]


_WS = " \t\n\r\f"
_UNSUPPORTED_COMBINATORS = "+~"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch in "-_" or ord(ch) > 127


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self) -> bool:
        start = self.pos
        while self.peek() in _WS and self.peek():
            self.pos += 1
        return self.pos > start

    def ident(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and _is_ident_char(self.text[self.pos]):
            self.pos += 1
        if self.pos == start:
            raise CssSyntaxError("expected identifier", start)
        return self.text[start:self.pos]


def _parse_compound(sc: _Scanner) -> Compound:
    tag: str | None = None
    el_id: str | None = None
    classes: list[str] = []
    attrs: list[AttrTest] = []
    universal = False
    if sc.peek() == "*":
        sc.pos += 1
        universal = True
    elif _is_ident_char(sc.peek()):
        tag = sc.ident().lower()
    while True:
        ch = sc.peek()
        if ch == "#":
            sc.pos += 1
            el_id = sc.ident()
        elif ch == ".":
            sc.pos += 1
            classes.append(sc.ident())
        elif ch == "[":
            sc.pos += 1
            sc.skip_ws()
            name = sc.ident().lower()
            sc.skip_ws()
            value: str | None = None
            if sc.peek() == "=":
                sc.pos += 1
                sc.skip_ws()
                if sc.peek() in "~|^$*":
                    raise CssUnsupportedError(f"{sc.peek()}= attribute operator", sc.pos)
                if sc.peek() in "\"'":
                    quote = sc.peek()
                    sc.pos += 1
                    start = sc.pos
                    while sc.peek() and sc.peek() != quote:
                        sc.pos += 1
                    if not sc.peek():
                        raise CssSyntaxError("unterminated attribute string", start)
                    value = sc.text[start:sc.pos]
                    sc.pos += 1
                else:
                    value = sc.ident()
                sc.skip_ws()
            elif sc.peek() in "~|^$*":
                raise CssUnsupportedError(f"{sc.peek()}= attribute operator", sc.pos)
            if sc.peek() != "]":
                raise CssSyntaxError("expected ']'", sc.pos)
            sc.pos += 1
            attrs.append(AttrTest(name, value))
        elif ch == ":":
            raise CssUnsupportedError("pseudo-class/pseudo-element", sc.pos)
        else:
            break
    return Compound(tag=tag, id=el_id, classes=tuple(classes), attrs=tuple(attrs), universal=universal)


def _parse_chain(sc: _Scanner) -> Chain:
    compounds = [_parse_compound(sc)]
    if compounds[0].is_empty():
        raise CssSyntaxError("expected selector", sc.pos)
    combinators: list[str] = []
    while True:
        had_ws = sc.skip_ws()
        ch = sc.peek()
        if ch and ch in _UNSUPPORTED_COMBINATORS:
            raise CssUnsupportedError(f"'{ch}' sibling combinator", sc.pos)
        if ch == ">":
            sc.pos += 1
            sc.skip_ws()
            combinators.append(">")
        elif had_ws and ch and ch != ",":
            combinators.append(" ")
        else:
            break
        nxt = _parse_compound(sc)
        if nxt.is_empty():
            raise CssSyntaxError("expected selector after combinator", sc.pos)
        compounds.append(nxt)
    return Chain(tuple(compounds), tuple(combinators))


def parse_css(selector: str) -> CssSelector:
    """Parse a selector of the supported subset into its AST."""
    sc = _Scanner(selector)
    groups: list[Chain] = []
    sc.skip_ws()
    if not sc.peek():
        raise CssSyntaxError("empty selector", 0)
    while True:
        groups.append(_parse_chain(sc))
        sc.skip_ws()
        if sc.peek() == ",":
            sc.pos += 1
            sc.skip_ws()
            continue
        if sc.peek():
            raise CssSyntaxError(f"unexpected {sc.peek()!r}", sc.pos)
        break
    return CssSelector(tuple(groups))


def _compound_matches(c: Compound, el: Element) -> bool:
    if c.tag is not None and el.tag != c.tag:
        return False
    if c.id is not None and el.attributes.get("id") != c.id:
        return False
    if c.classes:
        have = set(el.attributes.get("class", "").split())
        if not all(cls in have for cls in c.classes):
            return False
    for test in c.attrs:
        if test.name not in el.attributes:
            return False
        if test.value is not None and el.attributes[test.name] != test.value:
            return False
    return True


def _chain_matches(chain: Chain, el: Element, snapshot: PageSnapshot) -> bool:
    # Match right-to-left against the ancestor path.
    if not _compound_matches(chain.compounds[-1], el):
        return False

    def walk(idx: int, node: Element) -> bool:
        if idx < 0:
            return True
        combinator = chain.combinators[idx]
        compound = chain.compounds[idx]
        parent = snapshot.index.get(node.parent) if node.parent else None
        if combinator == ">":
            if parent is None or not _compound_matches(compound, parent):
                return False
            return walk(idx - 1, parent)
        anc = parent
        while anc is not None:
            if _compound_matches(compound, anc) and walk(idx - 1, anc):
                return True
            anc = snapshot.index.get(anc.parent) if anc.parent else None
        return False

    return walk(len(chain.combinators) - 1, el)


def matches(selector: CssSelector, element: Element, snapshot: PageSnapshot) -> bool:
    return any(_chain_matches(chain, element, snapshot) for chain in selector.groups)


def css_to_string(selector: CssSelector) -> str:
    """Canonical serialization (used for query pretty-printing)."""
    parts = []
    for chain in selector.groups:
        buf = [_compound_str(chain.compounds[0])]
        for comb, comp in zip(chain.combinators, chain.compounds[1:]):
            buf.append(" > " if comb == ">" else " ")
            buf.append(_compound_str(comp))
        parts.append("".join(buf))
    return ", ".join(parts)


def _compound_str(c: Compound) -> str:
    out = c.tag or ("*" if c.universal or not (c.id or c.classes or c.attrs) else "")
    if c.id:
        out += f"#{c.id}"
    for cls in c.classes:
        out += f".{cls}"
    for t in c.attrs:
        out += f"[{t.name}]" if t.value is None else f"[{t.name}={t.value}]"
    return out
