"""Shared test helpers: declarative page construction honoring all snapshot invariants."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

from visquery.snapshot import (
    Box,
    Element,
    FormMeta,
    Option,
    PageSnapshot,
    Raster,
    Viewport,
    normalize_text,
    validate,
)

_ids = itertools.count()


@dataclass
class N:
    """Declarative node; visible text is derived bottom-up when building."""

    tag: str = "div"
    text: str = ""
    id: str | None = None
    box: tuple[float, float, float, float] = (0, 0, 100, 20)
    font: float = 13.0
    visible: bool = True
    attrs: dict[str, str] = dc_field(default_factory=dict)
    listeners: tuple[str, ...] = ()
    bg_image: bool = False
    form: FormMeta | None = None
    children: list["N"] = dc_field(default_factory=list)


def form(input_type="text", value="", checked=False, options=(), multiple=False) -> FormMeta:
    opts = tuple(Option(v, l) for v, l in options)
    return FormMeta(input_type, value, checked, opts, multiple)


def build_page(
    *roots: N,
    url: str = "fixture://page",
    viewport: tuple[float, float] = (1024, 768),
    raster: Raster | None = None,
) -> PageSnapshot:
    elements: list[Element] = []

    def walk(node: N, parent_id: str | None, force_invisible: bool) -> str:
        node_id = node.id or f"e{next(_ids)}"
        visible = node.visible and not force_invisible
        child_texts: list[str] = []
        placeholder = len(elements)
        elements.append(None)  # type: ignore[arg-type]
        for child in node.children:
            cid = walk(child, node_id, force_invisible or not visible)
            child_el = next(e for e in elements if e is not None and e.id == cid)
            if child_el.visible and child_el.visible_text:
                child_texts.append(child_el.visible_text)
        own = normalize_text(node.text) if visible else ""
        visible_text = normalize_text(" ".join([own] + child_texts)) if visible else ""
        elements[placeholder] = Element(
            id=node_id,
            parent=parent_id,
            tag=node.tag,
            attributes=dict(node.attrs),
            own_text=own,
            visible_text=visible_text,
            box=Box(*node.box),
            font_size=node.font,
            visible=visible,
            listeners=frozenset(node.listeners),
            has_background_image=node.bg_image,
            form=node.form,
        )
        return node_id

    for root in roots:
        walk(root, None, False)
    snapshot = PageSnapshot(url, Viewport(*viewport), tuple(elements), raster)
    validate(snapshot)
    return snapshot


def flat_element(
    id="x",
    tag="div",
    text="",
    box=(0, 0, 100, 20),
    font=13.0,
    visible=True,
    attrs=None,
    listeners=(),
    bg_image=False,
    form=None,
    parent=None,
) -> Element:
    own = normalize_text(text) if visible else ""
    return Element(
        id=id,
        parent=parent,
        tag=tag,
        attributes=dict(attrs or {}),
        own_text=own,
        visible_text=own,
        box=Box(*box),
        font_size=font,
        visible=visible,
        listeners=frozenset(listeners),
        has_background_image=bg_image,
        form=form,
    )


def single_page(*elements: Element, viewport=(1024, 768), raster=None, url="fixture://flat"):
    """Page of sibling elements that are all roots (no hierarchy)."""
    snapshot = PageSnapshot(url, Viewport(*viewport), tuple(elements), raster)
    validate(snapshot)
    return snapshot


def write_fixture_app(directory, snapshots, transitions=(), start=None):
    """Write snapshot files plus a manifest.json; returns the manifest path.

    `snapshots` maps name -> PageSnapshot; `transitions` are
    (from_name, element_id, verb, to_name) tuples.
    """
    import json
    from pathlib import Path

    from visquery.snapshot import serialize_snapshot

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "snapshots": {},
        "transitions": [
            {
                "fromSnapshot": frm,
                "trigger": {"elementId": eid, "verb": verb},
                "toSnapshot": to,
            }
            for frm, eid, verb, to in transitions
        ],
    }
    if start is not None:
        manifest["start"] = start
    for name, snap in snapshots.items():
        filename = f"{name}.snap.json"
        (directory / filename).write_text(serialize_snapshot(snap), encoding="utf-8")
        manifest["snapshots"][name] = filename
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return path
