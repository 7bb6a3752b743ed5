"""Rendered-page data model: snapshot documents, validation, page statistics.

A snapshot is an immutable serialization of one rendered page state: the
element tree with geometry, text and form state, plus an optional screenshot
raster. Snapshots are produced externally (fixture files or the in-browser
extractor); this module never parses HTML or computes layout.
"""

from __future__ import annotations

import base64
import io
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable

import numpy as np
from PIL import Image

from .errors import SnapshotParseError, SnapshotValidationError

FORMAT_VERSION = 1

# Form input types that legitimately carry an options list.
SELECTION_INPUT_TYPES = frozenset({"select", "select-one", "select-multiple"})


def normalize_text(raw: str) -> str:
    """Collapse whitespace runs to single spaces and trim; case is preserved."""
    return " ".join(raw.split())


@dataclass(frozen=True)
class Box:
    """Axis-aligned bounding box in CSS pixels."""

    x: float
    y: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def diagonal(self) -> float:
        return float((self.w ** 2 + self.h ** 2) ** 0.5)


@dataclass(frozen=True)
class Viewport:
    width: float
    height: float


@dataclass(frozen=True)
class Option:
    value: str
    label: str


@dataclass(frozen=True)
class FormMeta:
    input_type: str
    value: str = ""
    checked: bool = False
    options: tuple[Option, ...] = ()
    multiple: bool = False

    def selected_values(self) -> tuple[str, ...]:
        # Multi-select state is encoded as comma-joined option values.
        if not self.value:
            return ()
        if self.multiple:
            return tuple(v for v in self.value.split(",") if v)
        return (self.value,)


@dataclass(frozen=True)
class Element:
    """One rendered node of the page."""

    id: str
    parent: str | None
    tag: str
    attributes: dict[str, str]
    own_text: str
    visible_text: str
    box: Box
    font_size: float
    visible: bool
    listeners: frozenset[str]
    has_background_image: bool
    form: FormMeta | None = None

    def attr(self, name: str) -> str | None:
        return self.attributes.get(name)


class Raster:
    """Screenshot pixels in device px, row-major RGB, with a device/CSS scale."""

    def __init__(self, pixels: np.ndarray, scale: float = 1.0):
        pixels = np.asarray(pixels, dtype=np.uint8)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise SnapshotValidationError(None, "raster-shape", "pixels must be an (h, w, 3) array")
        if scale <= 0:
            raise SnapshotValidationError(None, "raster-scale", f"scale must be > 0, got {scale}")
        self.pixels = pixels
        self.height = int(pixels.shape[0])
        self.width = int(pixels.shape[1])
        self.scale = float(scale)

    @classmethod
    def from_png_bytes(cls, data: bytes, scale: float = 1.0) -> "Raster":
        img = Image.open(io.BytesIO(data)).convert("RGB")
        return cls(np.asarray(img), scale)

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.pixels, mode="RGB").save(buf, format="PNG")
        return buf.getvalue()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Raster):
            return NotImplemented
        return self.scale == other.scale and np.array_equal(self.pixels, other.pixels)

    def __repr__(self) -> str:
        return f"Raster({self.width}x{self.height} @ {self.scale})"


@dataclass(frozen=True)
class PageSnapshot:
    """Immutable serialized page state; safe to share across threads."""

    url: str
    viewport: Viewport
    elements: tuple[Element, ...]
    raster: Raster | None = None
    index: dict[str, Element] = field(init=False, repr=False, compare=False)
    children: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    order: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        index: dict[str, Element] = {}
        order: dict[str, int] = {}
        children: dict[str, list[str]] = {}
        for pos, el in enumerate(self.elements):
            index[el.id] = el
            order[el.id] = pos
            children.setdefault(el.id, [])
            if el.parent is not None:
                children.setdefault(el.parent, []).append(el.id)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "children", {k: tuple(v) for k, v in children.items()})

    def __len__(self) -> int:
        return len(self.elements)

    def get(self, element_id: str) -> Element | None:
        return self.index.get(element_id)

    def ancestors(self, element_id: str) -> Iterable[Element]:
        el = self.index.get(element_id)
        while el is not None and el.parent is not None:
            el = self.index.get(el.parent)
            if el is not None:
                yield el

    def descendants(self, element_id: str) -> Iterable[Element]:
        stack = list(self.children.get(element_id, ()))
        while stack:
            cid = stack.pop()
            child = self.index[cid]
            yield child
            stack.extend(self.children.get(cid, ()))

    def with_element(self, element: Element) -> "PageSnapshot":
        """Return a new snapshot with one element replaced (same position)."""
        elements = tuple(element if e.id == element.id else e for e in self.elements)
        return PageSnapshot(self.url, self.viewport, elements, self.raster)


def default_font_size(snapshot: PageSnapshot) -> float:
    """Mode of font sizes over visible text-bearing elements; ties pick the
    smaller size; 16 when the page has no such elements."""
    counts = Counter(
        el.font_size for el in snapshot.elements if el.visible and el.own_text
    )
    if not counts:
        return 16.0
    best = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))
    return float(best[0])


# --- loading ----------------------------------------------------------------

def _require(obj: dict[str, Any], key: str, where: str) -> Any:
    if key not in obj:
        raise SnapshotValidationError(None, "missing-field", f"{where} is missing {key!r}")
    return obj[key]


def _parse_element(raw: dict[str, Any]) -> Element:
    if not isinstance(raw, dict):
        raise SnapshotValidationError(None, "element-shape", "element entries must be objects")
    el_id = _require(raw, "id", "element")
    if not isinstance(el_id, str) or not el_id:
        raise SnapshotValidationError(None, "element-id", "element id must be a nonempty string")
    box_raw = _require(raw, "box", f"element {el_id!r}")
    try:
        box = Box(float(box_raw["x"]), float(box_raw["y"]), float(box_raw["w"]), float(box_raw["h"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotValidationError(el_id, "box-shape", f"box must have numeric x/y/w/h: {exc}") from exc
    form = None
    if raw.get("form") is not None:
        f = raw["form"]
        options = tuple(
            Option(str(o.get("value", "")), str(o.get("label", ""))) for o in f.get("options", [])
        )
        form = FormMeta(
            input_type=str(f.get("inputType", "text")),
            value=str(f.get("value", "")),
            checked=bool(f.get("checked", False)),
            options=options,
            multiple=bool(f.get("multiple", False)),
        )
    attrs = raw.get("attrs", {})
    if not isinstance(attrs, dict):
        raise SnapshotValidationError(el_id, "attrs-shape", "attrs must be an object")
    return Element(
        id=el_id,
        parent=raw.get("parent"),
        tag=str(_require(raw, "tag", f"element {el_id!r}")).lower(),
        attributes={str(k): str(v) for k, v in attrs.items()},
        own_text=normalize_text(str(raw.get("ownText", ""))),
        visible_text=normalize_text(str(raw.get("visibleText", ""))),
        box=box,
        font_size=float(raw.get("fontSize", 16)),
        visible=bool(raw.get("visible", True)),
        listeners=frozenset(str(x) for x in raw.get("listeners", [])),
        has_background_image=bool(raw.get("hasBackgroundImage", False)),
        form=form,
    )


def _load_raster(spec: Any, base_dir: Path | None) -> Raster | None:
    if spec is None:
        return None
    if not isinstance(spec, dict):
        raise SnapshotValidationError(None, "screenshot-shape", "screenshot must be an object")
    scale = float(spec.get("scale", 1.0))
    if "data" in spec:
        return Raster.from_png_bytes(base64.b64decode(spec["data"]), scale)
    if "path" in spec:
        path = Path(spec["path"])
        if not path.is_absolute():
            if base_dir is None:
                raise SnapshotValidationError(
                    None, "screenshot-path", "relative screenshot path needs a base directory"
                )
            path = base_dir / path
        return Raster.from_png_bytes(path.read_bytes(), scale)
    raise SnapshotValidationError(None, "screenshot-shape", "screenshot needs 'path' or 'data'")


def validate(snapshot: PageSnapshot) -> None:
    """Check every structural invariant; raises SnapshotValidationError naming
    the offending element id and rule."""
    seen: set[str] = set()
    for pos, el in enumerate(snapshot.elements):
        if el.id in seen:
            raise SnapshotValidationError(el.id, "duplicate-id", "element id appears twice")
        seen.add(el.id)
        if el.parent is not None:
            if el.parent not in seen:
                raise SnapshotValidationError(
                    el.id, "parent-order",
                    f"parent {el.parent!r} does not appear earlier in document order",
                )
        if el.box.w < 0 or el.box.h < 0:
            raise SnapshotValidationError(el.id, "negative-box", f"box has negative size {el.box}")
        if not el.visible and el.visible_text != "":
            raise SnapshotValidationError(el.id, "invisible-text", "invisible element has visible text")
        if normalize_text(el.own_text) not in normalize_text(el.visible_text) and el.own_text:
            raise SnapshotValidationError(el.id, "own-not-in-visible", "ownText is not contained in visibleText")
        if el.own_text and el.font_size <= 0:
            raise SnapshotValidationError(el.id, "font-size", "text-bearing element needs fontSize > 0")
        if el.form is not None and el.form.options and el.form.input_type not in SELECTION_INPUT_TYPES:
            raise SnapshotValidationError(
                el.id, "form-options", f"options given for non-selection input type {el.form.input_type!r}"
            )
    for el in snapshot.elements:
        if el.parent is None or not el.visible:
            continue
        parent = snapshot.index[el.parent]
        if normalize_text(el.visible_text) not in normalize_text(parent.visible_text):
            raise SnapshotValidationError(
                parent.id, "child-text-containment",
                f"visibleText does not contain child {el.id!r}'s visibleText",
            )


def load_snapshot(source: bytes | str, base_dir: str | Path | None = None) -> PageSnapshot:
    """Parse and validate a snapshot document.

    `base_dir` resolves a relative screenshot path (set automatically by
    load_snapshot_file).
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SnapshotParseError(f"malformed snapshot document: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise SnapshotParseError("snapshot document must be a JSON object", 1, 1)
    version = doc.get("formatVersion")
    if version != FORMAT_VERSION:
        raise SnapshotValidationError(
            None, "format-version", f"formatVersion must be {FORMAT_VERSION}, got {version!r}"
        )
    url = str(_require(doc, "url", "document"))
    vp = _require(doc, "viewport", "document")
    try:
        viewport = Viewport(float(vp["width"]), float(vp["height"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotValidationError(None, "viewport-shape", f"viewport needs numeric width/height: {exc}") from exc
    elements_raw = _require(doc, "elements", "document")
    if not isinstance(elements_raw, list):
        raise SnapshotValidationError(None, "elements-shape", "elements must be an array")
    elements = tuple(_parse_element(e) for e in elements_raw)
    raster = _load_raster(doc.get("screenshot"), Path(base_dir) if base_dir else None)
    snapshot = PageSnapshot(url=url, viewport=viewport, elements=elements, raster=raster)
    validate(snapshot)
    return snapshot


def load_snapshot_file(path: str | Path) -> PageSnapshot:
    path = Path(path)
    return load_snapshot(path.read_bytes(), base_dir=path.parent)


def element_to_dict(el: Element) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": el.id,
        "parent": el.parent,
        "tag": el.tag,
        "attrs": dict(el.attributes),
        "ownText": el.own_text,
        "visibleText": el.visible_text,
        "box": {"x": el.box.x, "y": el.box.y, "w": el.box.w, "h": el.box.h},
        "fontSize": el.font_size,
        "visible": el.visible,
        "listeners": sorted(el.listeners),
        "hasBackgroundImage": el.has_background_image,
    }
    if el.form is not None:
        out["form"] = {
            "inputType": el.form.input_type,
            "value": el.form.value,
            "checked": el.form.checked,
            "options": [{"value": o.value, "label": o.label} for o in el.form.options],
            "multiple": el.form.multiple,
        }
    return out


def snapshot_to_dict(snapshot: PageSnapshot) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "formatVersion": FORMAT_VERSION,
        "url": snapshot.url,
        "viewport": {"width": snapshot.viewport.width, "height": snapshot.viewport.height},
        "elements": [element_to_dict(e) for e in snapshot.elements],
    }
    if snapshot.raster is not None:
        doc["screenshot"] = {
            "data": base64.b64encode(snapshot.raster.to_png_bytes()).decode("ascii"),
            "scale": snapshot.raster.scale,
        }
    return doc


def serialize_snapshot(snapshot: PageSnapshot) -> str:
    return json.dumps(snapshot_to_dict(snapshot), indent=2)


def tile_vertically(snapshot: PageSnapshot, copies: int) -> PageSnapshot:
    """Stack `copies` shifted clones of the page below each other.

    Used by the benchmark harness: tiling preserves the density of
    direction-predicate matches, which drives evaluation cost.
    """
    if copies < 1:
        raise ValueError("copies must be >= 1")
    shift = snapshot.viewport.height
    out: list[Element] = []
    for i in range(copies):
        for el in snapshot.elements:
            parent = f"c{i}-{el.parent}" if el.parent is not None else None
            out.append(
                replace(
                    el,
                    id=f"c{i}-{el.id}",
                    parent=parent,
                    box=Box(el.box.x, el.box.y + i * shift, el.box.w, el.box.h),
                )
            )
    viewport = Viewport(snapshot.viewport.width, snapshot.viewport.height * copies)
    return PageSnapshot(snapshot.url, viewport, tuple(out), snapshot.raster)
