"""Table discovery by keyword and cell addressing by indices or header text."""

from __future__ import annotations

from dataclasses import dataclass

from .classify import classify
from .engine import MatchTier, string_tier
from .errors import CellRangeError, EmptyCellError, HeaderNotFoundError, TableNotFoundError
from .querylang import ElementKind
from .snapshot import Element, PageSnapshot, normalize_text


@dataclass(frozen=True)
class TableModel:
    """Rectangular cell grid; the header row is excluded from row indexing.

    Spanned cells are replicated into each covered slot; ragged rows are
    padded with empty slots. Nested tables are opaque single cells.
    """

    table_element: Element
    headers: tuple[str, ...]
    grid: tuple[tuple[Element | None, ...], ...]
    header_cells: tuple[Element | None, ...] = ()

    @property
    def row_count(self) -> int:
        return len(self.grid)

    @property
    def col_count(self) -> int:
        return len(self.headers)

    @property
    def column_index(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for col, text in enumerate(self.headers):
            out.setdefault(text.casefold(), col)
        return out

    def rows(self):
        return iter(self.grid)


def _collect_rows(snapshot: PageSnapshot, table: Element) -> list[Element]:
    rows: list[Element] = []

    def walk(eid: str) -> None:
        for cid in snapshot.children.get(eid, ()):
            child = snapshot.index[cid]
            if child.tag == "table":
                continue  # nested table: opaque to the outer model
            if child.tag == "tr":
                rows.append(child)
                continue
            walk(cid)

    walk(table.id)
    return rows


def _collect_cells(snapshot: PageSnapshot, row: Element) -> list[Element]:
    cells: list[Element] = []

    def walk(eid: str) -> None:
        for cid in snapshot.children.get(eid, ()):
            child = snapshot.index[cid]
            if child.tag == "table":
                continue
            if child.tag in ("td", "th"):
                cells.append(child)
                continue
            walk(cid)

    walk(row.id)
    return cells


def _span(el: Element, attr: str) -> int:
    try:
        return max(1, int(el.attributes.get(attr, "1")))
    except ValueError:
        return 1


def _expand_grid(snapshot: PageSnapshot, row_elements: list[Element]) -> list[dict[int, Element]]:
    grid: list[dict[int, Element]] = []
    carry: dict[int, tuple[Element, int]] = {}
    for row_el in row_elements:
        row: dict[int, Element] = {col: el for col, (el, _) in carry.items()}
        next_carry: dict[int, tuple[Element, int]] = {
            col: (el, rem - 1) for col, (el, rem) in carry.items() if rem > 1
        }
        cursor = 0
        for cell in _collect_cells(snapshot, row_el):
            while cursor in row:
                cursor += 1
            colspan = _span(cell, "colspan")
            rowspan = _span(cell, "rowspan")
            for i in range(colspan):
                row[cursor + i] = cell
                if rowspan > 1:
                    next_carry[cursor + i] = (cell, rowspan - 1)
            cursor += colspan
        grid.append(row)
        carry = next_carry
    return grid


def build_table_model(snapshot: PageSnapshot, table: Element) -> TableModel:
    row_elements = _collect_rows(snapshot, table)
    sparse = _expand_grid(snapshot, row_elements)
    width = max((max(r) + 1 for r in sparse if r), default=0)
    dense = [tuple(r.get(c) for c in range(width)) for r in sparse]

    header_idx = 0
    for i, row_el in enumerate(row_elements):
        cells = _collect_cells(snapshot, row_el)
        if cells and all(c.tag == "th" for c in cells):
            header_idx = i
            break
    else:
        header_idx = 0 if dense else -1

    if header_idx >= 0 and dense:
        header_cells = dense[header_idx]
        headers = tuple(
            normalize_text(c.visible_text) if c is not None else "" for c in header_cells
        )
        data = tuple(r for i, r in enumerate(dense) if i != header_idx)
    else:
        header_cells = ()
        headers = tuple("" for _ in range(width))
        data = tuple(dense)
    return TableModel(table, headers, data, header_cells)


def get_table(snapshot: PageSnapshot, keyword: str) -> TableModel:
    """Model of the best table whose visible text matches the keyword.

    Better text tier wins; document order breaks ties.
    """
    best: tuple[int, int] | None = None  # (-tier, doc order)
    best_el: Element | None = None
    for el in snapshot.elements:
        if ElementKind.TABLE not in classify(el, snapshot):
            continue
        tier = string_tier(el.visible_text, keyword)
        if tier is MatchTier.NO_MATCH:
            continue
        key = (-int(tier), snapshot.order[el.id])
        if best is None or key < best:
            best, best_el = key, el
    if best_el is None:
        raise TableNotFoundError(f"no table matches keyword {keyword!r}")
    return build_table_model(snapshot, best_el)


def _resolve_header(model: TableModel, header: str) -> int:
    scored = [
        (col, string_tier(text, header))
        for col, text in enumerate(model.headers)
    ]
    best_tier = max((tier for _, tier in scored), default=MatchTier.NO_MATCH)
    if best_tier is MatchTier.NO_MATCH:
        raise HeaderNotFoundError(header, list(model.headers))
    winners = [col for col, tier in scored if tier == best_tier]
    texts = {model.headers[col].casefold() for col in winners}
    if len(winners) > 1 and len(texts) == 1:
        raise HeaderNotFoundError(
            header, list(model.headers)
        )  # duplicate headers make the access ambiguous
    return winners[0]


def get_cell(model: TableModel, row: int, col: int | str) -> Element:
    """Data cell at (row, column); the column is an ordinal or a header text."""
    if not 0 <= row < model.row_count:
        raise CellRangeError("row", row, model.row_count)
    if isinstance(col, str):
        col_idx = _resolve_header(model, col)
    else:
        if not 0 <= col < model.col_count:
            raise CellRangeError("column", col, model.col_count)
        col_idx = col
    cell = model.grid[row][col_idx]
    if cell is None:
        raise EmptyCellError(f"row {row} has no cell in column {col_idx}")
    return cell
