"""visquery: query rendered web pages the way a human reads them.

The package evaluates perception-level predicates (text, element kind,
direction, color, boolean combinations) over serialized page snapshots and
replays human-like interactions against fixture pages or a live browser
speaking the WebDriver wire protocol.
"""

from .colorlens import ColorMatch, ColorSpec, Dominance, Tolerance, match_color, name_to_rgb
from .datex import ExtractedDate, extract_date, extract_date_element
from .engine import (
    MatchTier,
    ResultSet,
    WeightConfig,
    evaluate,
    find_first,
    members,
    prune_descendants,
    text_tier,
    weigh,
)
from .errors import VisqueryError
from .interact import (
    Backend,
    FixtureBackend,
    InteractionCommand,
    JournalEntry,
    RealClock,
    Verb,
    VirtualClock,
    shortcut,
    wait_for,
)
from .tables import TableModel, get_cell, get_table
from .geometry import Dir, Overlap, center, direction_match, distance, overlap
from .querylang import (
    And,
    Color,
    Contains,
    Css,
    Direction,
    DirMode,
    ElementKind,
    Kind,
    Not,
    Or,
    Predicate,
    above,
    above_all,
    above_any,
    and_,
    below,
    below_all,
    below_any,
    checkable,
    choosable,
    clickable,
    color,
    contains,
    css,
    datepicker,
    headline,
    image,
    left_of,
    left_of_all,
    left_of_any,
    list_,
    not_,
    or_,
    parse_query,
    pretty_print,
    right_of,
    right_of_all,
    right_of_any,
    submittable,
    table,
    text,
    typable,
)
from .snapshot import (
    Box,
    Element,
    FormMeta,
    Option,
    PageSnapshot,
    Raster,
    Viewport,
    default_font_size,
    load_snapshot,
    load_snapshot_file,
    normalize_text,
    serialize_snapshot,
)

__version__ = "0.1.0"
