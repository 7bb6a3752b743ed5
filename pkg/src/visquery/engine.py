"""Evaluates predicate ASTs over a snapshot.

Pipeline: compositional membership over the whole AST, then distinct-descendant
pruning, then weighting with per-predicate score provenance, then ordering by
descending weight (document order breaks ties).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum

from . import css as csslib
from .classify import INPUT_KINDS, classify, resolve_label
from .colorlens import ColorMatch, ColorSpec, match_color
from .errors import RasterRequiredError
from .geometry import direction_match, distance
from .querylang import (
    And,
    Color,
    Contains,
    Css,
    Direction,
    ElementKind,
    Kind,
    Not,
    Or,
    Predicate,
)
from .snapshot import Element, PageSnapshot, default_font_size, normalize_text

ATTRIBUTE_PRIORITY = ("name", "id", "title", "class", "alt", "placeholder", "value")


class MatchTier(IntEnum):
    """Ordinal strength of a text match; higher is stronger."""

    NO_MATCH = 0
    CONTAINS = 1
    STARTS_ENDS = 2
    WORD = 3
    EXACT = 4


def string_tier(candidate: str, query: str) -> MatchTier:
    """Tier of `query` against one candidate string, case-insensitively."""
    text = normalize_text(candidate).casefold()
    q = normalize_text(query).casefold()
    if text == q:
        return MatchTier.EXACT
    if q in text.split():
        return MatchTier.WORD
    if text.startswith(q) or text.endswith(q):
        return MatchTier.STARTS_ENDS
    if q in text:
        return MatchTier.CONTAINS
    return MatchTier.NO_MATCH


def _attribute_tier(element: Element, query: str) -> MatchTier:
    # Fixed priority: the first attribute with any match decides.
    for name in ATTRIBUTE_PRIORITY:
        value = element.attributes.get(name)
        if value is None:
            continue
        tier = string_tier(value, query)
        if tier is not MatchTier.NO_MATCH:
            return tier
    return MatchTier.NO_MATCH


def text_tier(element: Element, query: str) -> MatchTier:
    """Visible text wins over any attribute match, whatever the tiers."""
    tier = string_tier(element.visible_text, query)
    if tier is not MatchTier.NO_MATCH:
        return tier
    return _attribute_tier(element, query)


@dataclass(frozen=True)
class WeightConfig:
    """Named scoring constants; the ordinal rules hold for any positive values
    as long as the tier scores stay strictly decreasing."""

    exact: float = 1.0
    word: float = 0.8
    starts_ends: float = 0.6
    contains: float = 0.4
    kind: float = 0.5
    css: float = 0.5
    label_bonus: float = 0.3
    size_prior: float = 0.1
    distance_half_life: float = 100.0
    scale: float = 1.0

    def tier_score(self, tier: MatchTier) -> float:
        return {
            MatchTier.EXACT: self.exact,
            MatchTier.WORD: self.word,
            MatchTier.STARTS_ENDS: self.starts_ends,
            MatchTier.CONTAINS: self.contains,
            MatchTier.NO_MATCH: 0.0,
        }[tier]


DEFAULT_WEIGHTS = WeightConfig()


@dataclass(frozen=True)
class ScoredElement:
    element: Element
    weight: float
    contributions: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class ResultSet:
    entries: tuple[ScoredElement, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self) -> tuple[str, ...]:
        return tuple(s.element.id for s in self.entries)

    def first(self) -> Element | None:
        return self.entries[0].element if self.entries else None

    def to_jsonable(self) -> list[dict]:
        return [
            {
                "id": s.element.id,
                "weight": round(s.weight, 6),
                "contributions": [
                    {"path": path, "score": round(score, 6)} for path, score in s.contributions
                ],
            }
            for s in self.entries
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_jsonable(), indent=2)


def find_first(result: ResultSet) -> Element | None:
    return result.first()


class _EvalContext:
    """Per-evaluation caches; a snapshot is immutable so these never go stale."""

    def __init__(self, snapshot: PageSnapshot, weights: WeightConfig):
        self.snapshot = snapshot
        self.weights = weights
        self.default_size = default_font_size(snapshot)
        self.all_ids = frozenset(snapshot.order)
        self._kinds: dict[str, frozenset[ElementKind]] = {}
        self._labels: dict[str, Element | None] = {}
        self._members: dict[int, frozenset[str]] = {}
        self._color: dict[tuple[str, ColorSpec], ColorMatch] = {}

    def kinds(self, el: Element) -> frozenset[ElementKind]:
        got = self._kinds.get(el.id)
        if got is None:
            got = classify(el, self.snapshot, self.default_size)
            self._kinds[el.id] = got
        return got

    def label(self, el: Element) -> Element | None:
        if el.id not in self._labels:
            self._labels[el.id] = resolve_label(el, self.snapshot)
        return self._labels[el.id]

    def color_match(self, el: Element, spec: ColorSpec) -> ColorMatch:
        key = (el.id, spec)
        got = self._color.get(key)
        if got is None:
            if self.snapshot.raster is None:
                raise RasterRequiredError("snapshot has no screenshot raster for a color predicate")
            got = match_color(el, self.snapshot.raster, spec)
            self._color[key] = got
        return got

    # --- membership -----------------------------------------------------

    def members(self, pred: Predicate) -> frozenset[str]:
        cached = self._members.get(id(pred))
        if cached is not None:
            return cached
        out = self._members_uncached(pred)
        self._members[id(pred)] = out
        return out

    def _members_uncached(self, pred: Predicate) -> frozenset[str]:
        snap = self.snapshot
        if isinstance(pred, Kind):
            return frozenset(e.id for e in snap.elements if self._kind_matches(e, pred))
        if isinstance(pred, Contains):
            return self._contains_members(pred.text)
        if isinstance(pred, Direction):
            return self._direction_members(pred)
        if isinstance(pred, Color):
            return frozenset(e.id for e in snap.elements if self.color_match(e, pred.spec).matched)
        if isinstance(pred, Css):
            return frozenset(e.id for e in snap.elements if csslib.matches(pred.selector, e, snap))
        if isinstance(pred, And):
            out = self.members(pred.children[0])
            for child in pred.children[1:]:
                out = out & self.members(child)
            return out
        if isinstance(pred, Or):
            out = self.members(pred.children[0])
            for child in pred.children[1:]:
                out = out | self.members(child)
            return out
        if isinstance(pred, Not):
            return self.all_ids - self.members(pred.child)
        raise TypeError(f"not a predicate: {pred!r}")

    def _kind_matches(self, el: Element, pred: Kind) -> bool:
        if pred.kind not in self.kinds(el):
            return False
        if pred.text is None:
            return True
        if text_tier(el, pred.text) is not MatchTier.NO_MATCH:
            return True
        if pred.kind in INPUT_KINDS:
            label = self.label(el)
            if label is not None and string_tier(label.visible_text, pred.text) is not MatchTier.NO_MATCH:
                return True
            if self._option_tier(el, pred.text) is not MatchTier.NO_MATCH:
                return True
        return False

    @staticmethod
    def _option_tier(el: Element, query: str) -> MatchTier:
        best = MatchTier.NO_MATCH
        if el.form is not None:
            for option in el.form.options:
                best = max(best, string_tier(option.label, query), string_tier(option.value, query))
        return best

    def _contains_members(self, query: str) -> frozenset[str]:
        # Attributes are consulted only when no element on the whole page
        # matches by visible text.
        by_text = frozenset(
            e.id for e in self.snapshot.elements
            if string_tier(e.visible_text, query) is not MatchTier.NO_MATCH
        )
        if by_text:
            return by_text
        return frozenset(
            e.id for e in self.snapshot.elements
            if _attribute_tier(e, query) is not MatchTier.NO_MATCH
        )

    def _direction_members(self, pred: Direction) -> frozenset[str]:
        refs = [self.snapshot.index[i] for i in self.members(pred.inner)]
        if not refs:
            return frozenset()
        out: set[str] = set()
        need_all = pred.mode.value == "all"
        for el in self.snapshot.elements:
            hits = (
                direction_match(el, ref, pred.direction, pred.max_distance) for ref in refs
            )
            if all(hits) if need_all else any(hits):
                out.add(el.id)
        return out

    # --- scoring ----------------------------------------------------------

    def contributions(self, pred: Predicate, member_ids: frozenset[str]) -> dict[str, list[tuple[str, float]]]:
        """Per-element provenance entries for every positive leaf match."""
        out: dict[str, list[tuple[str, float]]] = {eid: [] for eid in member_ids}
        self._collect(pred, "q", member_ids, out)
        return out

    def _collect(
        self,
        pred: Predicate,
        path: str,
        targets: frozenset[str],
        out: dict[str, list[tuple[str, float]]],
    ) -> None:
        if not targets:
            return
        w = self.weights
        if isinstance(pred, And):
            for i, child in enumerate(pred.children):
                self._collect(child, f"{path}.and[{i}]", targets & self.members(child), out)
            return
        if isinstance(pred, Or):
            for i, child in enumerate(pred.children):
                self._collect(child, f"{path}.or[{i}]", targets & self.members(child), out)
            return
        if isinstance(pred, Not):
            return  # negative matches carry no affinity signal
        relevant = targets & self.members(pred)
        if isinstance(pred, Kind):
            for eid in relevant:
                out[eid].append((f"{path}.kind", self._kind_score(self.snapshot.index[eid], pred)))
        elif isinstance(pred, Contains):
            scored = self._contains_scores(pred.text)
            for eid in relevant:
                out[eid].append((f"{path}.contains", scored[eid]))
        elif isinstance(pred, Direction):
            refs = [self.snapshot.index[i] for i in self.members(pred.inner)]
            for eid in relevant:
                el = self.snapshot.index[eid]
                dmin = min(
                    (
                        distance(el, ref)
                        for ref in refs
                        if direction_match(el, ref, pred.direction, pred.max_distance)
                    ),
                    default=None,
                )
                score = 0.0 if dmin is None else w.scale / (1.0 + dmin / w.distance_half_life)
                out[eid].append((f"{path}.{pred.direction.value}", score))
        elif isinstance(pred, Color):
            for eid in relevant:
                m = self.color_match(self.snapshot.index[eid], pred.spec)
                score = w.scale * m.dominant_fraction * (1.0 - m.mean_channel_distance)
                out[eid].append((f"{path}.color", score))
        elif isinstance(pred, Css):
            for eid in relevant:
                out[eid].append((f"{path}.css", w.scale * w.css))

    def _kind_score(self, el: Element, pred: Kind) -> float:
        w = self.weights
        if pred.text is None:
            return w.scale * w.kind
        best = w.tier_score(text_tier(el, pred.text))
        if pred.kind in INPUT_KINDS:
            label = self.label(el)
            if label is not None:
                label_tier = string_tier(label.visible_text, pred.text)
                if label_tier is not MatchTier.NO_MATCH:
                    best = max(best, w.tier_score(label_tier) + w.label_bonus)
            best = max(best, w.tier_score(self._option_tier(el, pred.text)))
        return w.scale * best

    def _contains_scores(self, query: str) -> dict[str, float]:
        w = self.weights
        by_text = {
            e.id: string_tier(e.visible_text, query) for e in self.snapshot.elements
        }
        if any(t is not MatchTier.NO_MATCH for t in by_text.values()):
            return {eid: w.scale * w.tier_score(t) for eid, t in by_text.items()}
        return {
            e.id: w.scale * w.tier_score(_attribute_tier(e, query))
            for e in self.snapshot.elements
        }


def members(snapshot: PageSnapshot, predicate: Predicate) -> frozenset[str]:
    """Raw membership semantics, before pruning/weighting (oracle-comparable)."""
    return _EvalContext(snapshot, DEFAULT_WEIGHTS).members(predicate)


def weigh(
    element: Element,
    contributions,
    snapshot: PageSnapshot,
    weights: WeightConfig | None = None,
) -> float:
    """Final weight: per-predicate scores summed, minus the size prior,
    clamped at zero (smaller elements are considered more specific)."""
    w = weights or DEFAULT_WEIGHTS
    total = sum(score for _, score in contributions)
    vp_area = snapshot.viewport.width * snapshot.viewport.height
    if vp_area > 0:
        total -= w.scale * w.size_prior * min(1.0, element.box.area / vp_area)
    return max(0.0, total)


def prune_descendants(snapshot: PageSnapshot, ids) -> frozenset[str]:
    """Drop every element that has a descendant in the set with identical
    normalized visible text, keeping the most specific element."""
    idset = frozenset(ids)
    removed: set[str] = set()
    for eid in idset:
        el = snapshot.index[eid]
        text = normalize_text(el.visible_text)
        for ancestor in snapshot.ancestors(eid):
            if ancestor.id in idset and normalize_text(ancestor.visible_text) == text:
                removed.add(ancestor.id)
    return idset - removed


def evaluate(
    snapshot: PageSnapshot,
    predicate: Predicate,
    weights: WeightConfig | None = None,
) -> ResultSet:
    """Full evaluation: membership, pruning, weighting, ordering."""
    ctx = _EvalContext(snapshot, weights or DEFAULT_WEIGHTS)
    member_ids = ctx.members(predicate)
    surviving = prune_descendants(snapshot, member_ids)
    contribs = ctx.contributions(predicate, surviving)
    w = ctx.weights
    vp_area = snapshot.viewport.width * snapshot.viewport.height
    scored: list[ScoredElement] = []
    for eid in surviving:
        el = snapshot.index[eid]
        weight = weigh(el, contribs[eid], snapshot, w)
        entries = list(contribs[eid])
        if vp_area > 0:
            ratio = min(1.0, el.box.area / vp_area)
            entries.append(("size", -w.scale * w.size_prior * ratio))
        scored.append(ScoredElement(el, weight, tuple(entries)))
    scored.sort(key=lambda s: (-s.weight, snapshot.order[s.element.id]))
    return ResultSet(tuple(scored))
