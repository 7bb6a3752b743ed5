"""Maps rendered elements onto the kinds a human recognizes on screen."""

from __future__ import annotations

from .errors import ElementLookupError
from .geometry import Dir, direction_match, distance
from .querylang import ElementKind
from .snapshot import Element, PageSnapshot, default_font_size

_HEADER_TAGS = frozenset({"h1", "h2", "h3", "h4", "h5", "h6"})
_CLICKABLE_INPUT_TYPES = frozenset({"button", "submit", "reset", "image", "checkbox", "radio"})
_TYPABLE_INPUT_TYPES = frozenset({"text", "search", "email", "url", "tel", "password", "number"})
_NATIVE_DATE_TYPES = frozenset({"date", "datetime-local", "time", "month", "week"})
_LIST_TAGS = frozenset({"ul", "ol", "dl"})

# Multiplier on the input's own diagonal bounding how far a label may sit.
LABEL_RADIUS_FACTOR = 1.5

INPUT_KINDS = frozenset(
    {ElementKind.TYPABLE, ElementKind.CHECKABLE, ElementKind.CHOOSABLE, ElementKind.DATEPICKER}
)


def _input_type(el: Element) -> str | None:
    if el.tag != "input":
        return None
    return el.attributes.get("type", "").lower() or None


def classify(
    element: Element, snapshot: PageSnapshot, default_size: float | None = None
) -> frozenset[ElementKind]:
    """All kinds the element satisfies; pure in (element fields, page default font size).

    `default_size` lets callers reuse a precomputed default_font_size when
    classifying many elements of the same page.
    """
    if snapshot.get(element.id) is None:
        raise ElementLookupError(element.id)
    if default_size is None:
        default_size = default_font_size(snapshot)
    kinds: set[ElementKind] = set()
    itype = _input_type(element)

    is_text = element.visible and bool(element.own_text)
    if is_text:
        kinds.add(ElementKind.TEXT)

    if element.tag in _HEADER_TAGS or (is_text and element.font_size > default_size):
        kinds.add(ElementKind.HEADLINE)

    if (
        (element.tag == "a" and "href" in element.attributes)
        or element.tag == "button"
        or (element.tag == "input" and itype in _CLICKABLE_INPUT_TYPES)
        or "click" in element.listeners
    ):
        kinds.add(ElementKind.CLICKABLE)

    typable = (
        (element.tag == "input" and (itype is None or itype in _TYPABLE_INPUT_TYPES))
        or element.tag == "textarea"
        or element.attributes.get("contenteditable", "").lower() == "true"
    )
    if typable:
        kinds.add(ElementKind.TYPABLE)

    if element.tag == "input" and itype in ("checkbox", "radio"):
        kinds.add(ElementKind.CHECKABLE)

    if element.tag == "select":
        kinds.add(ElementKind.CHOOSABLE)

    if element.tag == "input" and itype in _NATIVE_DATE_TYPES:
        kinds.add(ElementKind.DATEPICKER)
    elif typable and _smells_like_datepicker(element):
        kinds.add(ElementKind.DATEPICKER)

    if (element.tag == "input" and itype in ("submit", "image")) or (
        element.tag == "button" and element.attributes.get("type", "submit").lower() == "submit"
    ):
        kinds.add(ElementKind.SUBMITTABLE)

    if element.tag == "img" or element.has_background_image:
        kinds.add(ElementKind.IMAGE)

    if element.tag in _LIST_TAGS:
        kinds.add(ElementKind.LIST)

    if element.tag == "table":
        kinds.add(ElementKind.TABLE)

    return frozenset(kinds)


def _smells_like_datepicker(el: Element) -> bool:
    # Script-driven pickers advertise themselves through naming conventions.
    for attr in ("id", "class", "name"):
        value = el.attributes.get(attr, "").lower()
        if "date" in value or "picker" in value:
            return True
    return False


def resolve_label(element: Element, snapshot: PageSnapshot) -> Element | None:
    """Find the text label a human would read for a form field.

    An explicit `label[for=...]` association wins; otherwise the closest text
    element left of or above the field, within 1.5x the field's diagonal.
    """
    if snapshot.get(element.id) is None:
        raise ElementLookupError(element.id)
    html_id = element.attributes.get("id")
    for el in snapshot.elements:
        if el.tag != "label":
            continue
        target = el.attributes.get("for")
        if target is not None and (target == html_id or target == element.id):
            return el

    radius = LABEL_RADIUS_FACTOR * element.box.diagonal
    best: Element | None = None
    best_d = float("inf")
    for el in snapshot.elements:
        if el.id == element.id or not (el.visible and el.own_text):
            continue
        if not (
            direction_match(el, element, Dir.LEFT_OF) or direction_match(el, element, Dir.ABOVE)
        ):
            continue
        d = distance(el, element)
        if d <= radius and d < best_d:
            best = el
            best_d = d
    return best
