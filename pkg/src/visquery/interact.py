"""Human-like interaction commands addressed by queries against a pluggable backend.

A backend exposes the current page snapshot and performs commands on elements.
The fixture backend simulates an application from snapshot files plus a
transition manifest, which makes full interaction scenarios testable without
a browser; every performed command lands in an append-only journal that can be
replayed deterministically.
"""

from __future__ import annotations

import datetime as dt
import json
import math
import time as _time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Protocol

from .classify import classify
from .engine import MatchTier, ResultSet, evaluate, find_first, string_tier
from .errors import (
    ElementLookupError,
    ElementNotFoundError,
    IncompatibleCommandError,
    InteractionTimeoutError,
)
from .querylang import ElementKind, Kind, Predicate
from .snapshot import Element, FormMeta, PageSnapshot, load_snapshot_file


class Verb(Enum):
    CLICK = "click"
    DOUBLE_CLICK = "doubleclick"
    RIGHT_CLICK = "rightclick"
    HOVER = "hover"
    DRAG = "drag"
    DRAG_BY = "dragby"
    TYPE = "type"
    KEY_PRESS = "keypress"
    KEY_HOLD = "keyhold"
    KEY_RELEASE = "keyrelease"
    CHOOSE = "choose"
    UNCHOOSE = "unchoose"
    CHECK_TOGGLE = "checktoggle"
    CHOOSE_DATE = "choosedate"
    SUBMIT = "submit"


# Verbs whose payload must be a string (text, key or option name).
_NEEDS_TEXT = {Verb.TYPE, Verb.KEY_PRESS, Verb.KEY_HOLD, Verb.KEY_RELEASE, Verb.CHOOSE, Verb.UNCHOOSE}
_NEEDS_COORDS = {Verb.DRAG_BY}

# The kind predicate each shortcut verb queries, mirroring the two-step
# fetch-then-act semantics.
VERB_KIND: dict[Verb, ElementKind] = {
    Verb.CLICK: ElementKind.CLICKABLE,
    Verb.DOUBLE_CLICK: ElementKind.CLICKABLE,
    Verb.RIGHT_CLICK: ElementKind.CLICKABLE,
    Verb.HOVER: ElementKind.CLICKABLE,
    Verb.DRAG: ElementKind.CLICKABLE,
    Verb.TYPE: ElementKind.TYPABLE,
    Verb.KEY_PRESS: ElementKind.TYPABLE,
    Verb.CHOOSE: ElementKind.CHOOSABLE,
    Verb.UNCHOOSE: ElementKind.CHOOSABLE,
    Verb.CHECK_TOGGLE: ElementKind.CHECKABLE,
    Verb.CHOOSE_DATE: ElementKind.DATEPICKER,
    Verb.SUBMIT: ElementKind.SUBMITTABLE,
}


@dataclass(frozen=True)
class InteractionCommand:
    verb: Verb
    payload: Any = None
    append: bool = False  # TYPE only: append instead of replacing the value

    def __post_init__(self) -> None:
        if self.verb in _NEEDS_TEXT and not isinstance(self.payload, str):
            raise ValueError(f"{self.verb.value} needs a string payload")
        if self.verb in _NEEDS_COORDS and not (
            isinstance(self.payload, (tuple, list)) and len(self.payload) == 2
        ):
            raise ValueError(f"{self.verb.value} needs (x, y) coordinates")
        if self.verb is Verb.CHOOSE_DATE and not isinstance(self.payload, (str, dt.date)):
            raise ValueError("choosedate needs a date or ISO string payload")


@dataclass(frozen=True)
class JournalEntry:
    verb: str
    element_id: str
    payload: Any = None
    modifiers: tuple[str, ...] = ()
    fields: dict[str, str] | None = None  # submit only: captured form values

    def to_json_line(self) -> str:
        record: dict[str, Any] = {
            "verb": self.verb,
            "elementId": self.element_id,
            "payload": self.payload,
            "modifiers": list(self.modifiers),
        }
        if self.fields is not None:
            record["fields"] = self.fields
        return json.dumps(record, separators=(",", ":"), sort_keys=False)

    @classmethod
    def from_json_line(cls, line: str) -> "JournalEntry":
        raw = json.loads(line)
        return cls(
            verb=raw["verb"],
            element_id=raw["elementId"],
            payload=raw.get("payload"),
            modifiers=tuple(raw.get("modifiers", ())),
            fields=raw.get("fields"),
        )


class Backend(Protocol):
    def current_snapshot(self) -> PageSnapshot: ...
    def perform(self, element_id: str, command: InteractionCommand) -> JournalEntry: ...


# --- clocks -------------------------------------------------------------------

class VirtualClock:
    """Manually advanced clock; sleep() moves time without waiting."""

    def __init__(self, start: float = 0.0):
        self._now = start

    def now(self) -> float:
        return self._now

    def sleep(self, seconds: float) -> None:
        self._now += seconds


class RealClock:
    def now(self) -> float:
        return _time.monotonic()

    def sleep(self, seconds: float) -> None:
        _time.sleep(seconds)


# --- fixture backend -----------------------------------------------------------

@dataclass(frozen=True)
class Transition:
    from_snapshot: str
    element_id: str
    verb: str
    to_snapshot: str


@dataclass
class FixtureManifest:
    snapshots: dict[str, Path]
    transitions: list[Transition]
    start: str | None = None

    @classmethod
    def load(cls, path: str | Path) -> "FixtureManifest":
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        snapshots = {
            name: (path.parent / rel) for name, rel in raw.get("snapshots", {}).items()
        }
        transitions = [
            Transition(
                from_snapshot=t["fromSnapshot"],
                element_id=t["trigger"]["elementId"],
                verb=t["trigger"]["verb"].lower(),
                to_snapshot=t["toSnapshot"],
            )
            for t in raw.get("transitions", [])
        ]
        return cls(snapshots=snapshots, transitions=transitions, start=raw.get("start"))


class FixtureBackend:
    """Simulated interaction target navigating among snapshot files.

    An optional timeline [(at_seconds, snapshot_name), ...] switches the
    current page as the clock advances, which is how delayed-appearance
    scenarios (waitFor) are scripted.
    """

    def __init__(
        self,
        manifest: FixtureManifest | str | Path,
        start: str | None = None,
        clock: VirtualClock | RealClock | None = None,
        timeline: list[tuple[float, str]] | None = None,
    ):
        self.manifest = (
            manifest if isinstance(manifest, FixtureManifest) else FixtureManifest.load(manifest)
        )
        self.clock = clock or VirtualClock()
        self.timeline = sorted(timeline or [])
        self.journal: list[JournalEntry] = []
        self.held_keys: list[str] = []
        self._cache: dict[str, PageSnapshot] = {}
        first = start or self.manifest.start
        if first is None:
            raise ValueError("fixture backend needs a start snapshot")
        self._navigate(first)

    # Snapshot state ------------------------------------------------------

    def _load(self, name: str) -> PageSnapshot:
        if name not in self._cache:
            try:
                path = self.manifest.snapshots[name]
            except KeyError:
                raise ElementLookupError(name) from None
            self._cache[name] = load_snapshot_file(path)
        return self._cache[name]

    def _navigate(self, name: str) -> None:
        self.current_name = name
        self._current = self._load(name)

    def navigate(self, name: str) -> None:
        """Jump to a named snapshot, like entering a URL."""
        self._navigate(name)

    def current_snapshot(self) -> PageSnapshot:
        for at, name in self.timeline:
            if self.clock.now() >= at:
                if name != self.current_name:
                    self._navigate(name)
        return self._current

    # Command execution ----------------------------------------------------

    def perform(self, element_id: str, command: InteractionCommand) -> JournalEntry:
        snapshot = self.current_snapshot()
        element = snapshot.get(element_id)
        if element is None:
            raise ElementLookupError(element_id)
        kinds = classify(element, snapshot)
        verb = command.verb
        entry_fields: dict[str, str] | None = None

        if verb is Verb.TYPE:
            self._require(verb, element, ElementKind.TYPABLE in kinds, "not typable")
            self._set_form_value(element, command.payload, command.append)
        elif verb is Verb.CHECK_TOGGLE:
            self._require(verb, element, ElementKind.CHECKABLE in kinds, "not checkable")
            form = element.form
            self._replace_form(element, replace(form, checked=not form.checked))
        elif verb in (Verb.CHOOSE, Verb.UNCHOOSE):
            self._require(verb, element, ElementKind.CHOOSABLE in kinds, "not choosable")
            self._choose(element, command.payload, select=verb is Verb.CHOOSE)
        elif verb is Verb.CHOOSE_DATE:
            self._require(verb, element, ElementKind.DATEPICKER in kinds, "not a datepicker")
            value = command.payload.isoformat() if isinstance(command.payload, dt.date) else str(command.payload)
            self._set_form_value(element, value, append=False)
        elif verb is Verb.SUBMIT:
            self._require(verb, element, ElementKind.SUBMITTABLE in kinds, "not submittable")
            entry_fields = self._form_fields(element)
            self._follow_transition(element_id, verb)
        elif verb is Verb.CLICK:
            self._follow_transition(element_id, verb)
        # Hover/Drag/DragBy/DoubleClick/RightClick/KeyPress: journal only.

        if verb is Verb.KEY_HOLD:
            if command.payload not in self.held_keys:
                self.held_keys.append(command.payload)
        if verb is Verb.KEY_RELEASE and command.payload in self.held_keys:
            self.held_keys.remove(command.payload)

        payload = command.payload
        if isinstance(payload, dt.date):
            payload = payload.isoformat()
        entry = JournalEntry(
            verb=verb.value,
            element_id=element_id,
            payload=payload,
            modifiers=tuple(self.held_keys),
            fields=entry_fields,
        )
        self.journal.append(entry)
        return entry

    @staticmethod
    def _require(verb: Verb, element: Element, ok: bool, why: str) -> None:
        if not ok:
            raise IncompatibleCommandError(verb.value, element.id, why)
        if verb in (Verb.CHECK_TOGGLE, Verb.CHOOSE, Verb.UNCHOOSE) and element.form is None:
            raise IncompatibleCommandError(verb.value, element.id, "element carries no form state")

    def _replace_form(self, element: Element, form) -> None:
        self._current = self._current.with_element(replace(element, form=form))

    def _set_form_value(self, element: Element, text: str, append: bool) -> None:
        # Form-less typables (contenteditable) get form state attached so the
        # snapshot's text invariants stay untouched.
        form = element.form or FormMeta("text")
        base = form.value if append else ""
        self._replace_form(element, replace(form, value=base + text))

    def _choose(self, element: Element, option_text: str, select: bool) -> None:
        form = element.form
        best, best_tier = None, MatchTier.NO_MATCH
        for option in form.options:
            tier = max(string_tier(option.label, option_text), string_tier(option.value, option_text))
            if tier > best_tier:
                best, best_tier = option, tier
        if best is None or best_tier is MatchTier.NO_MATCH:
            raise IncompatibleCommandError(
                "choose", element.id, f"no option matches {option_text!r}"
            )
        selected = list(form.selected_values())
        if select:
            if not form.multiple:
                selected = [best.value]
            elif best.value not in selected:
                selected.append(best.value)
        else:
            selected = [v for v in selected if v != best.value]
        self._replace_form(element, replace(form, value=",".join(selected)))

    def _form_fields(self, element: Element) -> dict[str, str]:
        snapshot = self._current
        scope: Element | None = None
        for ancestor in snapshot.ancestors(element.id):
            if ancestor.tag == "form":
                scope = ancestor
                break
        candidates = (
            snapshot.descendants(scope.id) if scope is not None else snapshot.elements
        )
        fields: dict[str, str] = {}
        for el in candidates:
            if el.form is None:
                continue
            name = el.attributes.get("name") or el.attributes.get("id") or el.id
            if el.form.input_type in ("checkbox", "radio"):
                fields[name] = "on" if el.form.checked else ""
            else:
                fields[name] = el.form.value
        return fields

    def _follow_transition(self, element_id: str, verb: Verb) -> None:
        for t in self.manifest.transitions:
            if (
                t.from_snapshot == self.current_name
                and t.element_id == element_id
                and t.verb == verb.value
            ):
                self._navigate(t.to_snapshot)
                return
        # No mapped transition: the click/submit stays on the page.

    # Journal --------------------------------------------------------------

    def write_journal(self, path: str | Path) -> None:
        Path(path).write_text(
            "".join(e.to_json_line() + "\n" for e in self.journal), encoding="utf-8"
        )


def replay_journal(backend: FixtureBackend, entries: list[JournalEntry]) -> None:
    """Re-perform journal entries on a fresh backend (modifiers replay too)."""
    for entry in entries:
        verb = Verb(entry.verb)
        payload = entry.payload
        backend.perform(entry.element_id, InteractionCommand(verb, payload))


# --- query-addressed interaction ------------------------------------------------

EvaluateFn = Callable[[PageSnapshot, Predicate], ResultSet]


def shortcut(
    backend: Backend,
    verb: Verb,
    query: Predicate | str,
    payload: Any = None,
    evaluate_fn: EvaluateFn = evaluate,
) -> Element:
    """Two consecutive steps: query the verb-appropriate kind and take the
    first result, then perform the command on it. Returns the element."""
    kind = VERB_KIND.get(verb)
    if isinstance(query, str):
        predicate: Predicate = Kind(kind, query) if kind else Kind(ElementKind.CLICKABLE, query)
    elif kind is not None:
        predicate = Kind(kind) & query
    else:
        predicate = query
    snapshot = backend.current_snapshot()
    element = find_first(evaluate_fn(snapshot, predicate))
    if element is None:
        raise ElementNotFoundError(query)
    backend.perform(element.id, InteractionCommand(verb, payload))
    return element


def wait_for(
    backend: Backend,
    predicate: Predicate,
    timeout_seconds: float,
    clock: VirtualClock | RealClock | None = None,
    evaluate_fn: EvaluateFn = evaluate,
) -> Element:
    """Re-evaluate once per second until the predicate matches.

    Polls happen at t = 0, 1, 2, ...; after ceil(timeout) failed polls a
    timeout error is raised.
    """
    if timeout_seconds <= 0:
        raise ValueError("timeout must be positive")
    if clock is None:
        clock = getattr(backend, "clock", None) or RealClock()
    polls = math.ceil(timeout_seconds)
    for i in range(polls):
        if i:
            clock.sleep(1.0)
        element = find_first(evaluate_fn(backend.current_snapshot(), predicate))
        if element is not None:
            return element
    raise InteractionTimeoutError(predicate, timeout_seconds, polls)
