"""Interaction commands, fixture backend semantics, shortcuts, waitFor polling."""

import pytest

import visquery as vq
from visquery.engine import evaluate
from visquery.errors import (
    ElementNotFoundError,
    IncompatibleCommandError,
    InteractionTimeoutError,
)
from visquery.interact import (
    FixtureBackend,
    InteractionCommand,
    JournalEntry,
    Verb,
    VirtualClock,
    replay_journal,
    shortcut,
    wait_for,
)

from helpers import N, build_page, flat_element, form, single_page, write_fixture_app


def entry_form_page():
    return build_page(
        N(tag="body", children=[
            N(tag="form", id="form1", attrs={"id": "form1"}, children=[
                N(tag="span", id="desc_label", text="Description", box=(10, 10, 90, 20)),
                N(tag="input", id="f1", attrs={"type": "text", "name": "description"},
                  box=(110, 10, 160, 20), form=form("text")),
                N(tag="input", id="news", attrs={"type": "checkbox", "name": "newsletter"},
                  box=(110, 40, 15, 15), form=form("checkbox")),
                N(tag="select", id="lang", attrs={"name": "language"}, box=(110, 70, 120, 20),
                  form=form("select", options=[("en", "english"), ("es", "spanish"), ("de", "german")])),
                N(tag="select", id="tags", attrs={"name": "tags"}, box=(110, 100, 120, 40),
                  form=form("select-multiple", options=[("a", "salt"), ("b", "onion"), ("c", "vinegar")],
                            multiple=True)),
                N(tag="input", id="addbtn", attrs={"type": "submit", "value": "Add"},
                  box=(110, 150, 60, 24), form=form("submit", value="Add")),
            ]),
            N(tag="a", id="link2", attrs={"href": "/two"}, text="go to page two",
              box=(10, 200, 120, 16)),
        ]),
        url="fixture://page1",
    )


def second_page():
    return single_page(
        flat_element("headline2", tag="h1", text="Saved!", font=24),
        url="fixture://page2",
    )


@pytest.fixture()
def app(tmp_path):
    manifest = write_fixture_app(
        tmp_path,
        {"page1": entry_form_page(), "page2": second_page()},
        transitions=[
            ("page1", "link2", "click", "page2"),
            ("page1", "addbtn", "submit", "page2"),
        ],
        start="page1",
    )
    return FixtureBackend(manifest)


class TestFixturePerform:
    def test_type_sets_form_value(self, app):
        app.perform("f1", InteractionCommand(Verb.TYPE, "Blue Shoes"))
        assert app.current_snapshot().index["f1"].form.value == "Blue Shoes"

    def test_type_replaces_by_default_appends_on_request(self, app):
        app.perform("f1", InteractionCommand(Verb.TYPE, "one"))
        app.perform("f1", InteractionCommand(Verb.TYPE, "two"))
        assert app.current_snapshot().index["f1"].form.value == "two"
        app.perform("f1", InteractionCommand(Verb.TYPE, "-more", append=True))
        assert app.current_snapshot().index["f1"].form.value == "two-more"

    def test_click_anchor_navigates(self, app):
        app.perform("link2", InteractionCommand(Verb.CLICK))
        assert app.current_name == "page2"
        assert app.current_snapshot().url == "fixture://page2"

    def test_click_without_transition_stays(self, app):
        app.perform("news", InteractionCommand(Verb.CLICK))
        assert app.current_name == "page1"

    def test_check_toggle_flips(self, app):
        app.perform("news", InteractionCommand(Verb.CHECK_TOGGLE))
        assert app.current_snapshot().index["news"].form.checked
        app.perform("news", InteractionCommand(Verb.CHECK_TOGGLE))
        assert not app.current_snapshot().index["news"].form.checked

    def test_choose_single_select(self, app):
        app.perform("lang", InteractionCommand(Verb.CHOOSE, "spanish"))
        assert app.current_snapshot().index["lang"].form.value == "es"
        app.perform("lang", InteractionCommand(Verb.CHOOSE, "german"))
        assert app.current_snapshot().index["lang"].form.value == "de"

    def test_choose_multiple_respects_multiplicity(self, app):
        app.perform("tags", InteractionCommand(Verb.CHOOSE, "salt"))
        app.perform("tags", InteractionCommand(Verb.CHOOSE, "vinegar"))
        assert app.current_snapshot().index["tags"].form.selected_values() == ("a", "c")
        app.perform("tags", InteractionCommand(Verb.UNCHOOSE, "salt"))
        assert app.current_snapshot().index["tags"].form.selected_values() == ("c",)

    def test_submit_navigates_and_journals_fields(self, app):
        app.perform("f1", InteractionCommand(Verb.TYPE, "Blue Shoes"))
        app.perform("news", InteractionCommand(Verb.CHECK_TOGGLE))
        entry = app.perform("addbtn", InteractionCommand(Verb.SUBMIT))
        assert app.current_name == "page2"
        assert entry.fields["description"] == "Blue Shoes"
        assert entry.fields["newsletter"] == "on"

    def test_modifier_state_attached_to_clicks(self, app):
        app.perform("news", InteractionCommand(Verb.KEY_HOLD, "ctrl"))
        e1 = app.perform("link2", InteractionCommand(Verb.CLICK))
        app.perform("headline2", InteractionCommand(Verb.KEY_RELEASE, "ctrl"))
        assert e1.modifiers == ("ctrl",)
        assert app.journal[-1].modifiers == ()

    def test_hover_family_is_journal_only(self, app):
        before = app.current_snapshot()
        for verb in (Verb.HOVER, Verb.DOUBLE_CLICK, Verb.RIGHT_CLICK):
            app.perform("link2", InteractionCommand(verb))
        assert app.current_snapshot() == before
        assert [e.verb for e in app.journal] == ["hover", "doubleclick", "rightclick"]

    def test_incompatible_command(self, app):
        with pytest.raises(IncompatibleCommandError):
            app.perform("link2", InteractionCommand(Verb.TYPE, "nope"))
        with pytest.raises(IncompatibleCommandError):
            app.perform("f1", InteractionCommand(Verb.CHOOSE, "x"))

    def test_unknown_element(self, app):
        from visquery.errors import ElementLookupError
        with pytest.raises(ElementLookupError):
            app.perform("ghost", InteractionCommand(Verb.CLICK))

    def test_payload_validation(self):
        with pytest.raises(ValueError):
            InteractionCommand(Verb.TYPE, None)
        with pytest.raises(ValueError):
            InteractionCommand(Verb.DRAG_BY, "not-coords")


class TestJournal:
    def test_every_perform_appends_one_entry(self, app):
        app.perform("f1", InteractionCommand(Verb.TYPE, "x"))
        app.perform("news", InteractionCommand(Verb.CHECK_TOGGLE))
        app.perform("link2", InteractionCommand(Verb.CLICK))
        assert len(app.journal) == 3
        assert [e.verb for e in app.journal] == ["type", "checktoggle", "click"]

    def test_journal_round_trips_jsonl(self, app, tmp_path):
        app.perform("f1", InteractionCommand(Verb.TYPE, "x"))
        app.perform("addbtn", InteractionCommand(Verb.SUBMIT))
        out = tmp_path / "journal.jsonl"
        app.write_journal(out)
        lines = out.read_text().splitlines()
        parsed = [JournalEntry.from_json_line(l) for l in lines]
        assert parsed == app.journal

    def test_replay_reproduces_final_state(self, app, tmp_path):
        app.perform("f1", InteractionCommand(Verb.TYPE, "Blue Shoes"))
        app.perform("lang", InteractionCommand(Verb.CHOOSE, "spanish"))
        app.perform("news", InteractionCommand(Verb.CHECK_TOGGLE))
        app.perform("addbtn", InteractionCommand(Verb.SUBMIT))
        fresh = FixtureBackend(write_fixture_app(
            tmp_path / "fresh",
            {"page1": entry_form_page(), "page2": second_page()},
            transitions=[("page1", "link2", "click", "page2"), ("page1", "addbtn", "submit", "page2")],
            start="page1",
        ))
        replay_journal(fresh, app.journal)
        assert fresh.current_name == app.current_name
        assert fresh.journal == app.journal


class TestShortcut:
    def test_type_by_label_then_click(self, app):
        element = shortcut(app, Verb.TYPE, "Description", "Blue Shoes")
        assert element.id == "f1"
        assert app.current_snapshot().index["f1"].form.value == "Blue Shoes"
        shortcut(app, Verb.SUBMIT, "Add")
        assert app.current_name == "page2"

    def test_choose_by_option_text(self, app):
        element = shortcut(app, Verb.CHOOSE, "spanish", "spanish")
        assert element.id == "lang"
        assert app.current_snapshot().index["lang"].form.value == "es"

    def test_not_found(self, app):
        with pytest.raises(ElementNotFoundError):
            shortcut(app, Verb.CLICK, "Publish")

    def test_accepts_predicate_query(self, app):
        element = shortcut(app, Verb.CLICK, vq.contains("page two"))
        assert element.id == "link2"

    def test_uses_engines_find_first(self, app):
        calls = []

        def recording(snapshot, predicate):
            result = evaluate(snapshot, predicate)
            calls.append((predicate, result.ids()))
            return result

        shortcut(app, Verb.TYPE, "Description", "x", evaluate_fn=recording)
        assert len(calls) == 1
        assert calls[0][1][0] == "f1"


class TestWaitFor:
    def make_delayed_backend(self, tmp_path, appear_at, timeout_page="empty"):
        empty = single_page(flat_element("filler", text="nothing"), url="fixture://empty")
        target = single_page(
            flat_element("userfield", tag="input", attrs={"type": "text", "name": "username"}),
            url="fixture://target",
        )
        manifest = write_fixture_app(
            tmp_path, {"empty": empty, "target": target}, start="empty"
        )
        clock = VirtualClock()
        backend = FixtureBackend(manifest, clock=clock, timeline=[(appear_at, "target")])
        return backend, clock

    def wrap_counting(self, backend):
        count = {"polls": 0}
        original = backend.current_snapshot

        def counting():
            count["polls"] += 1
            return original()

        backend.current_snapshot = counting
        return count

    def test_appears_at_poll_two(self, tmp_path):
        backend, clock = self.make_delayed_backend(tmp_path, appear_at=1.0)
        count = self.wrap_counting(backend)
        element = wait_for(backend, vq.typable("username"), timeout_seconds=5)
        assert element.id == "userfield"
        assert count["polls"] == 2
        assert clock.now() == 1.0

    def test_timeout_after_ceil_polls(self, tmp_path):
        backend, clock = self.make_delayed_backend(tmp_path, appear_at=99.0)
        count = self.wrap_counting(backend)
        with pytest.raises(InteractionTimeoutError) as exc:
            wait_for(backend, vq.typable("username"), timeout_seconds=3)
        assert count["polls"] == 3
        assert exc.value.polls == 3

    def test_fractional_timeout_rounds_up(self, tmp_path):
        backend, _ = self.make_delayed_backend(tmp_path, appear_at=99.0)
        count = self.wrap_counting(backend)
        with pytest.raises(InteractionTimeoutError):
            wait_for(backend, vq.typable("username"), timeout_seconds=2.5)
        assert count["polls"] == 3

    def test_immediate_match_never_sleeps(self, tmp_path):
        backend, clock = self.make_delayed_backend(tmp_path, appear_at=0.0)
        element = wait_for(backend, vq.typable("username"), timeout_seconds=5)
        assert element.id == "userfield"
        assert clock.now() == 0.0

    def test_rejects_nonpositive_timeout(self, tmp_path):
        backend, _ = self.make_delayed_backend(tmp_path, appear_at=0.0)
        with pytest.raises(ValueError):
            wait_for(backend, vq.typable("username"), timeout_seconds=0)
