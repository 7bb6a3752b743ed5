// In-page extractor: walks the rendered element tree and serializes it into
// the snapshot document format (formatVersion 1) consumed by the query engine.
// Runs inside the browser via WebDriver execute-sync; must never throw across
// the protocol boundary, so failures come back as an {error} payload.

export const FORMAT_VERSION = 1;

// Interactions resolve elements through this generated attribute.
export const ID_ATTR = "data-vsq-id";

// Tags whose content is never rendered; skipped entirely.
const SKIP_TAGS = new Set(["script", "style", "noscript", "template"]);

const ON_EVENT_ATTR = /^on([a-z]+)$/;

// Exactly the whitespace set the engine's text normalization collapses
// (ASCII controls FS..US and NEL included, BOM excluded).
const WHITESPACE_RUN =
  /[\t\n\x0b\f\r \x1c\x1d\x1e\x1f\x85\xa0\u1680\u2000-\u200a\u2028\u2029\u202f\u205f\u3000]+/g;

export function normalizeText(raw: string): string {
  return raw.replace(WHITESPACE_RUN, " ").replace(/^ /, "").replace(/ $/, "");
}

interface BoxRecord {
  x: number;
  y: number;
  w: number;
  h: number;
}

interface FormRecord {
  inputType: string;
  value: string;
  checked: boolean;
  options: { value: string; label: string }[];
  multiple: boolean;
}

interface ElementRecord {
  id: string;
  parent: string | null;
  tag: string;
  attrs: Record<string, string>;
  ownText: string;
  visibleText: string;
  box: BoxRecord;
  fontSize: number;
  visible: boolean;
  listeners: string[];
  hasBackgroundImage: boolean;
  form?: FormRecord;
}

interface SnapshotDocument {
  formatVersion: number;
  url: string;
  viewport: { width: number; height: number };
  elements: ElementRecord[];
}

// Optional instrumentation shim: a page-level registry of listeners attached
// before page scripts ran. Detection is best effort; without the shim only
// inline on* attributes are seen.
type ListenerRegistry = { get(el: Element): string[] | undefined };

function listenerRegistry(win: Window): ListenerRegistry | null {
  const reg = (win as any).__vsqListeners;
  return reg && typeof reg.get === "function" ? reg : null;
}

function collectAttrs(el: Element): Record<string, string> {
  const out: Record<string, string> = {};
  for (let i = 0; i < el.attributes.length; i++) {
    const attr = el.attributes[i];
    out[attr.name.toLowerCase()] = attr.value;
  }
  return out;
}

function detectListeners(el: Element, registry: ListenerRegistry | null): string[] {
  const events = new Set<string>();
  for (let i = 0; i < el.attributes.length; i++) {
    const m = ON_EVENT_ATTR.exec(el.attributes[i].name.toLowerCase());
    if (m) {
      events.add(m[1]);
    }
  }
  if (registry) {
    for (const name of registry.get(el) ?? []) {
      events.add(name);
    }
  }
  return Array.from(events).sort();
}

function directText(el: Element): string {
  let out = "";
  for (let node = el.firstChild; node; node = node.nextSibling) {
    if (node.nodeType === 3 /* TEXT_NODE */) {
      out += node.nodeValue ?? "";
    }
  }
  return normalizeText(out);
}

function formMeta(el: Element): FormRecord | undefined {
  const tag = el.tagName.toLowerCase();
  if (tag === "input") {
    const input = el as HTMLInputElement;
    const type = (el.getAttribute("type") || "text").toLowerCase();
    return {
      inputType: type,
      value: input.value ?? "",
      checked: type === "checkbox" || type === "radio" ? !!input.checked : false,
      options: [],
      multiple: false,
    };
  }
  if (tag === "textarea") {
    return {
      inputType: "textarea",
      value: (el as HTMLTextAreaElement).value ?? "",
      checked: false,
      options: [],
      multiple: false,
    };
  }
  if (tag === "select") {
    const select = el as HTMLSelectElement;
    const options = Array.from(select.options).map((o) => ({
      value: o.value,
      label: normalizeText(o.label || o.text || ""),
    }));
    const selected = Array.from(select.options)
      .filter((o) => o.selected)
      .map((o) => o.value);
    return {
      inputType: select.multiple ? "select-multiple" : "select",
      value: selected.join(","),
      checked: false,
      options,
      multiple: select.multiple,
    };
  }
  return undefined;
}

class IdAllocator {
  private used = new Set<string>();
  private counter = 0;

  assign(el: Element): string {
    // Reuse a previously stamped id so extractions of the same page state
    // stay stable; collisions (foreign attributes) get a fresh id.
    const existing = el.getAttribute(ID_ATTR);
    if (existing && !this.used.has(existing)) {
      this.used.add(existing);
      return existing;
    }
    let id: string;
    do {
      id = `n${this.counter++}`;
    } while (this.used.has(id));
    el.setAttribute(ID_ATTR, id);
    this.used.add(id);
    return id;
  }
}

function walk(
  el: Element,
  parentId: string | null,
  parentVisible: boolean,
  win: Window,
  ids: IdAllocator,
  registry: ListenerRegistry | null,
  out: ElementRecord[],
): ElementRecord {
  const id = ids.assign(el);
  const style = win.getComputedStyle(el);
  const rect = el.getBoundingClientRect();
  const x = rect.left + (win.scrollX || 0);
  const y = rect.top + (win.scrollY || 0);
  const hiddenByStyle = style.display === "none" || style.visibility === "hidden";
  const zeroArea = rect.width <= 0 || rect.height <= 0;
  const visible = parentVisible && !hiddenByStyle && !zeroArea;

  const record: ElementRecord = {
    id,
    parent: parentId,
    tag: el.tagName.toLowerCase(),
    attrs: collectAttrs(el),
    ownText: "",
    visibleText: "",
    box: { x, y, w: rect.width, h: rect.height },
    fontSize: parseFloat(style.fontSize) || 16,
    visible,
    listeners: detectListeners(el, registry),
    hasBackgroundImage: !!style.backgroundImage && style.backgroundImage !== "none",
  };
  const form = formMeta(el);
  if (form) {
    record.form = form;
  }
  out.push(record);

  const childTexts: string[] = [];
  for (let child = el.firstElementChild; child; child = child.nextElementSibling) {
    if (SKIP_TAGS.has(child.tagName.toLowerCase())) {
      continue;
    }
    const childRecord = walk(child, id, visible, win, ids, registry, out);
    if (childRecord.visible && childRecord.visibleText) {
      childTexts.push(childRecord.visibleText);
    }
  }

  if (visible) {
    record.ownText = directText(el);
    // Own text first, then child subtree texts: keeps both containment
    // invariants (ownText in visibleText, child text in parent text) exact.
    record.visibleText = normalizeText([record.ownText, ...childTexts].filter(Boolean).join(" "));
  }
  return record;
}

export function buildSnapshot(doc: Document): SnapshotDocument {
  const win = doc.defaultView;
  if (!win) {
    throw new Error("document is not attached to a window");
  }
  const elements: ElementRecord[] = [];
  const root = doc.documentElement;
  if (root && !SKIP_TAGS.has(root.tagName.toLowerCase())) {
    walk(root, null, true, win, new IdAllocator(), listenerRegistry(win), elements);
  }
  return {
    formatVersion: FORMAT_VERSION,
    url: win.location.href,
    viewport: { width: win.innerWidth, height: win.innerHeight },
    elements,
  };
}

export function extract(doc?: Document): string | { error: string } {
  try {
    const target = doc ?? document;
    return JSON.stringify(buildSnapshot(target));
  } catch (err) {
    // An error object (not a thrown exception) crosses the protocol boundary
    // cleanly; the wire client turns it into a script-execution error.
    return { error: String(err instanceof Error ? err.stack || err.message : err) };
  }
}
