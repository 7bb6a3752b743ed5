import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import test from "node:test";

import { JSDOM } from "jsdom";

import { extract, normalizeText, FORMAT_VERSION, ID_ATTR } from "../src/extractor";
import { installLayoutShim } from "./layout_shim";

const VECTORS_PATH = join(__dirname, "..", "..", "..", "conformance", "normalize_vectors.json");

function render(html: string): { dom: JSDOM; doc: Document } {
  const dom = new JSDOM(html, { url: "http://corpus.test/page" });
  installLayoutShim(dom.window);
  return { dom, doc: dom.window.document };
}

function extractRecords(doc: Document) {
  const raw = extract(doc);
  assert.equal(typeof raw, "string");
  const snapshot = JSON.parse(raw as string);
  assert.equal(snapshot.formatVersion, FORMAT_VERSION);
  return snapshot;
}

test("normalization vectors match the shared conformance file bit for bit", () => {
  const vectors: [string, string][] = JSON.parse(readFileSync(VECTORS_PATH, "utf-8"));
  assert.ok(vectors.length >= 10);
  for (const [raw, expected] of vectors) {
    assert.equal(normalizeText(raw), expected, JSON.stringify(raw));
  }
});

test("a simple page serializes with parents, text and geometry", () => {
  const { doc } = render(
    "<body><div><p>Hello <b>World</b> End</p></div><a href='/x'>link text</a></body>",
  );
  const snapshot = extractRecords(doc);
  const byTag = new Map<string, any>(snapshot.elements.map((e: any) => [e.tag, e]));
  const p = byTag.get("p");
  const b = byTag.get("b");
  assert.equal(b.parent, p.id);
  // own text first, children after: both containment invariants hold
  assert.equal(p.ownText, "Hello End");
  assert.equal(p.visibleText, "Hello End World");
  assert.ok(p.visibleText.includes(b.visibleText));
  assert.ok(p.box.w > 0 && p.box.h > 0);
  assert.equal(byTag.get("a").attrs.href, "/x");
});

test("display:none subtrees and hidden/zero-area elements are invisible and empty", () => {
  const { doc } = render(
    "<body>" +
      "<div style='display:none'><p>ghost</p></div>" +
      "<span style='visibility:hidden'>beacon</span>" +
      "<p data-zero='1'>collapsed</p>" +
      "<p>real</p>" +
      "</body>",
  );
  const snapshot = extractRecords(doc);
  for (const record of snapshot.elements) {
    if (!record.visible) {
      assert.equal(record.visibleText, "");
      assert.equal(record.ownText, "");
    }
  }
  const texts = snapshot.elements.filter((e: any) => e.tag === "p");
  assert.equal(texts.filter((e: any) => e.visible).length, 1);
  const spans = snapshot.elements.filter((e: any) => e.tag === "span");
  assert.equal(spans[0].visible, false);
});

test("inline handler attributes register as listeners", () => {
  const { doc } = render(
    "<body><button onclick='go()'>Go</button><a href='#' onmouseover='x()'>h</a></body>",
  );
  const snapshot = extractRecords(doc);
  const button = snapshot.elements.find((e: any) => e.tag === "button");
  assert.deepEqual(button.listeners, ["click"]);
  const anchor = snapshot.elements.find((e: any) => e.tag === "a");
  assert.deepEqual(anchor.listeners, ["mouseover"]);
});

test("the instrumentation registry contributes listeners when present", () => {
  const { dom, doc } = render("<body><div id='hot'>zone</div></body>");
  const hot = doc.getElementById("hot")!;
  const registry = new Map<Element, string[]>();
  registry.set(hot, ["click", "keydown"]);
  (dom.window as any).__vsqListeners = registry;
  const snapshot = extractRecords(doc);
  const record = snapshot.elements.find((e: any) => e.attrs.id === "hot");
  assert.deepEqual(record.listeners, ["click", "keydown"]);
});

test("form metadata covers inputs, selects and textareas", () => {
  const { doc } = render(
    "<body><form>" +
      "<input type='checkbox' checked name='stay'>" +
      "<input name='user' value='admin'>" +
      "<select multiple><option value='a' selected>Alpha</option><option value='b' selected>Beta</option></select>" +
      "<textarea>note text</textarea>" +
      "</form></body>",
  );
  const snapshot = extractRecords(doc);
  const forms = new Map<string, any>(
    snapshot.elements.filter((e: any) => e.form).map((e: any) => [e.form.inputType, e.form]),
  );
  assert.equal(forms.get("checkbox").checked, true);
  assert.equal(forms.get("text").value, "admin");
  const select = forms.get("select-multiple");
  assert.equal(select.multiple, true);
  assert.equal(select.value, "a,b");
  assert.deepEqual(select.options[0], { value: "a", label: "Alpha" });
  assert.equal(forms.get("textarea").value, "note text");
});

test("background images are detected", () => {
  const { doc } = render(
    "<body><div style='background-image: url(x.png)'>promo</div><div>plain</div></body>",
  );
  const snapshot = extractRecords(doc);
  const divs = snapshot.elements.filter((e: any) => e.tag === "div");
  assert.deepEqual(divs.map((d: any) => d.hasBackgroundImage), [true, false]);
});

test("generated ids are unique and stable across extractions of one state", () => {
  const { doc } = render("<body><div><p>a</p><p>b</p></div><span>c</span></body>");
  const first = extractRecords(doc);
  const ids = first.elements.map((e: any) => e.id);
  assert.equal(new Set(ids).size, ids.length);
  for (const record of first.elements) {
    const el = doc.querySelector(`[${ID_ATTR}="${record.id}"]`);
    assert.ok(el, record.id);
  }
  const second = extractRecords(doc);
  assert.deepEqual(second.elements.map((e: any) => e.id), ids);
});

test("script/style/template subtrees are omitted", () => {
  const { doc } = render(
    "<body><script>var hidden = 1;</script><style>.x{}</style><p>shown</p></body>",
  );
  const snapshot = extractRecords(doc);
  const tags = new Set(snapshot.elements.map((e: any) => e.tag));
  assert.ok(!tags.has("script"));
  assert.ok(!tags.has("style"));
  assert.ok(tags.has("p"));
});

test("errors come back as a payload instead of a throw", () => {
  const detached = new JSDOM("<body></body>").window.document.implementation.createHTMLDocument();
  // a document without a browsing context has no defaultView
  const result = extract(detached);
  assert.equal(typeof result, "object");
  assert.ok((result as { error: string }).error.length > 0);
});
