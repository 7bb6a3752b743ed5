"""Minimal W3C WebDriver wire client.

Covers exactly what the toolkit needs: session lifecycle, navigation, script
injection (to run the in-page extractor), screenshots, and element
interactions. Element identity between snapshots and interactions is bridged
by the generated id attribute the extractor stamps on every element; refs are
resolved on demand so no stale driver references are held.
"""

from __future__ import annotations

import base64
import json
import threading
import urllib.error
import urllib.request
import weakref
from dataclasses import dataclass, field
from typing import Any

from .errors import (
    ScriptExecutionError,
    StaleElementError,
    WebDriverConnectionError,
    WebDriverProtocolError,
)
from .interact import InteractionCommand, Verb
from .snapshot import PageSnapshot, Raster, load_snapshot

ELEMENT_KEY = "element-6066-11e4-a52e-4f735466cecf"

# Attribute the extractor stamps on every element; interactions resolve
# WebDriver refs through it.
ELEMENT_ID_ATTR = "data-vsq-id"

KEYCODES = {
    "enter": "", "return": "", "tab": "", "escape": "",
    "esc": "", "space": " ", "backspace": "", "delete": "",
    "left": "", "up": "", "right": "", "down": "",
    "ctrl": "", "control": "", "shift": "", "alt": "",
    "meta": "", "cmd": "", "pageup": "", "pagedown": "",
    "home": "", "end": "",
}

_SELECT_OPTION_SCRIPT = (
    "var el = arguments[0], text = String(arguments[1]).toLowerCase(), on = arguments[2];"
    " var hit = null;"
    " for (var i = 0; i < el.options.length; i++) {"
    "   var o = el.options[i];"
    "   if (o.label.toLowerCase() === text || o.value.toLowerCase() === text"
    "       || o.label.toLowerCase().indexOf(text) !== -1) { hit = o; break; }"
    " }"
    " if (!hit) { return false; }"
    " if (!el.multiple) { for (var j = 0; j < el.options.length; j++) { el.options[j].selected = false; } }"
    " hit.selected = on;"
    " el.dispatchEvent(new Event('change', {bubbles: true}));"
    " return true;"
)


def _key_code(name: str) -> str:
    return KEYCODES.get(name.lower(), name)


def _canonical(body: dict[str, Any]) -> bytes:
    return json.dumps(body, separators=(",", ":")).encode("utf-8")


def _pointer_actions(steps: list[dict[str, Any]]) -> dict[str, Any]:
    return {
        "actions": [
            {
                "type": "pointer",
                "id": "mouse",
                "parameters": {"pointerType": "mouse"},
                "actions": steps,
            }
        ]
    }


def _key_actions(steps: list[dict[str, Any]]) -> dict[str, Any]:
    return {"actions": [{"type": "key", "id": "keyboard", "actions": steps}]}


def _move_to(ref: str) -> dict[str, Any]:
    return {"type": "pointerMove", "duration": 0, "origin": {ELEMENT_KEY: ref}, "x": 0, "y": 0}


def _press(button: int = 0) -> list[dict[str, Any]]:
    return [{"type": "pointerDown", "button": button}, {"type": "pointerUp", "button": button}]


def _delete_session(endpoint: str, session_id: str, timeout: float) -> None:
    try:
        req = urllib.request.Request(
            f"{endpoint}/session/{session_id}", method="DELETE"
        )
        urllib.request.urlopen(req, timeout=timeout).read()
    except Exception:
        pass  # teardown is best effort


class WebDriverSession:
    """One live session against a W3C WebDriver endpoint; single in-flight request."""

    def __init__(self, endpoint: str, session_id: str, capabilities: dict[str, Any], timeout: float):
        self.endpoint = endpoint
        self.session_id = session_id
        self.capabilities = capabilities
        self.timeout = timeout
        self.warnings: list[str] = []
        self._lock = threading.Lock()
        self._last_ids: frozenset[str] = frozenset()
        self._ref_cache: dict[str, str] = {}
        self._finalizer = weakref.finalize(self, _delete_session, endpoint, session_id, timeout)

    # --- plumbing ---------------------------------------------------------

    def _request(self, method: str, path: str, body: dict[str, Any] | None = None) -> Any:
        url = f"{self.endpoint}{path}"
        data = _canonical(body) if body is not None else None
        req = urllib.request.Request(url, data=data, method=method)
        if data is not None:
            req.add_header("Content-Type", "application/json; charset=utf-8")
        with self._lock:
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    raw = resp.read()
            except urllib.error.HTTPError as exc:
                raw = exc.read()
                return self._fail(raw, exc.code)
            except urllib.error.URLError as exc:
                raise WebDriverConnectionError(f"cannot reach {url}: {exc.reason}") from exc
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise WebDriverProtocolError(f"non-JSON response from {path}") from exc
        if not isinstance(payload, dict) or "value" not in payload:
            raise WebDriverProtocolError(f"response from {path} has no 'value'")
        return payload["value"]

    @staticmethod
    def _fail(raw: bytes, status: int) -> Any:
        try:
            value = json.loads(raw)["value"]
            error, message = value["error"], value.get("message", "")
        except Exception:
            raise WebDriverProtocolError(f"HTTP {status} with non-conforming error body") from None
        if error == "javascript error":
            raise ScriptExecutionError(message)
        raise WebDriverProtocolError(f"{error}: {message}")

    # --- session lifecycle --------------------------------------------------

    @classmethod
    def connect(
        cls,
        endpoint: str,
        capabilities: dict[str, Any] | None = None,
        timeout: float = 30.0,
    ) -> "WebDriverSession":
        endpoint = endpoint.rstrip("/")
        body = {"capabilities": capabilities or {"alwaysMatch": {}}}
        req = urllib.request.Request(
            f"{endpoint}/session", data=_canonical(body), method="POST"
        )
        req.add_header("Content-Type", "application/json; charset=utf-8")
        try:
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                raw = resp.read()
        except urllib.error.HTTPError as exc:
            cls._fail(exc.read(), exc.code)
        except urllib.error.URLError as exc:
            raise WebDriverConnectionError(f"cannot reach {endpoint}: {exc.reason}") from exc
        try:
            value = json.loads(raw)["value"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise WebDriverProtocolError("new-session response is not conforming") from exc
        session_id = value.get("sessionId") if isinstance(value, dict) else None
        if not session_id:
            raise WebDriverProtocolError("new-session response carries no sessionId")
        return cls(endpoint, session_id, value.get("capabilities", {}), timeout)

    def quit(self) -> None:
        if self._finalizer.alive:
            self._finalizer()

    def __enter__(self) -> "WebDriverSession":
        return self

    def __exit__(self, *exc_info) -> None:
        self.quit()

    # --- navigation -----------------------------------------------------------

    def _spath(self, suffix: str) -> str:
        return f"/session/{self.session_id}{suffix}"

    def navigate(self, url: str) -> None:
        self._request("POST", self._spath("/url"), {"url": url})

    def back(self) -> None:
        self._request("POST", self._spath("/back"), {})

    def forward(self) -> None:
        self._request("POST", self._spath("/forward"), {})

    def current_url(self) -> str:
        return self._request("GET", self._spath("/url"))

    # --- scripts, screenshots, snapshots ---------------------------------------

    def execute_sync(self, script: str, args: list[Any] | None = None) -> Any:
        return self._request(
            "POST", self._spath("/execute/sync"), {"script": script, "args": args or []}
        )

    def screenshot_png(self) -> bytes:
        data = self._request("GET", self._spath("/screenshot"))
        return base64.b64decode(data)

    def snapshot(self, extractor_script: str) -> PageSnapshot:
        """Run the extractor in the page, validate its document, attach a raster."""
        value = self.execute_sync(extractor_script)
        if isinstance(value, dict) and "error" in value:
            raise ScriptExecutionError(f"extractor failed: {value['error']}")
        if not isinstance(value, str):
            raise WebDriverProtocolError("extractor returned a non-string result")
        snapshot = load_snapshot(value)
        raster = None
        try:
            png = self.screenshot_png()
            image = Raster.from_png_bytes(png)
            scale = image.width / snapshot.viewport.width if snapshot.viewport.width else 1.0
            raster = Raster(image.pixels, scale)
        except Exception as exc:  # degraded mode: keep the snapshot, note the gap
            self.warnings.append(f"screenshot unavailable: {exc}")
        if raster is not None:
            snapshot = PageSnapshot(snapshot.url, snapshot.viewport, snapshot.elements, raster)
        self._last_ids = frozenset(snapshot.order)
        self._ref_cache = {}
        return snapshot

    # --- element interaction -----------------------------------------------------

    def _resolve_ref(self, element_id: str) -> str:
        ref = self._ref_cache.get(element_id)
        if ref is None:
            selector = f'[{ELEMENT_ID_ATTR}="{element_id}"]'
            value = self._request(
                "POST", self._spath("/element"), {"using": "css selector", "value": selector}
            )
            try:
                ref = value[ELEMENT_KEY]
            except (TypeError, KeyError):
                raise WebDriverProtocolError("find-element response carries no element ref") from None
            self._ref_cache[element_id] = ref
        return ref

    def perform(self, element_id: str, command: InteractionCommand) -> None:
        if element_id not in self._last_ids:
            raise StaleElementError(element_id)
        verb = command.verb
        if verb in (Verb.CLICK, Verb.SUBMIT, Verb.CHECK_TOGGLE):
            ref = self._resolve_ref(element_id)
            self._request("POST", self._spath(f"/element/{ref}/click"), {})
        elif verb in (Verb.TYPE, Verb.CHOOSE_DATE):
            ref = self._resolve_ref(element_id)
            text = command.payload if isinstance(command.payload, str) else command.payload.isoformat()
            if not command.append:
                self._request("POST", self._spath(f"/element/{ref}/clear"), {})
            self._request("POST", self._spath(f"/element/{ref}/value"), {"text": text})
        elif verb is Verb.KEY_PRESS:
            ref = self._resolve_ref(element_id)
            self._request(
                "POST", self._spath(f"/element/{ref}/value"), {"text": _key_code(command.payload)}
            )
        elif verb in (Verb.KEY_HOLD, Verb.KEY_RELEASE):
            kind = "keyDown" if verb is Verb.KEY_HOLD else "keyUp"
            body = _key_actions([{"type": kind, "value": _key_code(command.payload)}])
            self._request("POST", self._spath("/actions"), body)
        elif verb is Verb.HOVER:
            ref = self._resolve_ref(element_id)
            self._request("POST", self._spath("/actions"), _pointer_actions([_move_to(ref)]))
        elif verb is Verb.DOUBLE_CLICK:
            ref = self._resolve_ref(element_id)
            steps = [_move_to(ref)] + _press() + _press()
            self._request("POST", self._spath("/actions"), _pointer_actions(steps))
        elif verb is Verb.RIGHT_CLICK:
            ref = self._resolve_ref(element_id)
            steps = [_move_to(ref)] + _press(button=2)
            self._request("POST", self._spath("/actions"), _pointer_actions(steps))
        elif verb is Verb.DRAG:
            src = self._resolve_ref(element_id)
            steps: list[dict[str, Any]] = [_move_to(src), {"type": "pointerDown", "button": 0}]
            if isinstance(command.payload, str):
                dst = self._resolve_ref(command.payload)
                steps.append(_move_to(dst))
            else:
                x, y = command.payload
                steps.append(
                    {"type": "pointerMove", "duration": 0, "origin": "viewport", "x": int(x), "y": int(y)}
                )
            steps.append({"type": "pointerUp", "button": 0})
            self._request("POST", self._spath("/actions"), _pointer_actions(steps))
        elif verb is Verb.DRAG_BY:
            ref = self._resolve_ref(element_id)
            x, y = command.payload
            steps = [
                _move_to(ref),
                {"type": "pointerDown", "button": 0},
                {"type": "pointerMove", "duration": 0, "origin": "pointer", "x": int(x), "y": int(y)},
                {"type": "pointerUp", "button": 0},
            ]
            self._request("POST", self._spath("/actions"), _pointer_actions(steps))
        elif verb in (Verb.CHOOSE, Verb.UNCHOOSE):
            ref = self._resolve_ref(element_id)
            self.execute_sync(
                _SELECT_OPTION_SCRIPT,
                [{ELEMENT_KEY: ref}, command.payload, verb is Verb.CHOOSE],
            )
        else:
            raise WebDriverProtocolError(f"verb {verb.value} has no wire mapping")


def connect(endpoint: str, capabilities: dict[str, Any] | None = None, timeout: float = 30.0) -> WebDriverSession:
    return WebDriverSession.connect(endpoint, capabilities, timeout)


@dataclass
class WebDriverBackend:
    """Backend protocol adapter: snapshots and commands over a live session."""

    session: WebDriverSession
    extractor_script: str
    _cached: PageSnapshot | None = field(default=None, repr=False)

    def navigate(self, url: str) -> None:
        self.session.navigate(url)
        self._cached = None

    def current_snapshot(self) -> PageSnapshot:
        if self._cached is None:
            self._cached = self.session.snapshot(self.extractor_script)
        return self._cached

    def perform(self, element_id: str, command: InteractionCommand):
        from .interact import JournalEntry

        self.session.perform(element_id, command)
        self._cached = None
        payload = command.payload
        if hasattr(payload, "isoformat"):
            payload = payload.isoformat()
        return JournalEntry(verb=command.verb.value, element_id=element_id, payload=payload)
