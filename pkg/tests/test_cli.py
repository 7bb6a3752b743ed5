"""CLI subcommands: exit codes, machine-readable output, script execution."""

import json

import pytest

from visquery.cli import main, parse_script
from visquery.cli import ScriptError

from conftest import FIXTURE_DIR

SEARCH = str(FIXTURE_DIR / "search_results.snap.json")
TABLE = str(FIXTURE_DIR / "user_table.snap.json")
BENCH = str(FIXTURE_DIR / "bench.snap.json")
BLOGAPP = f"fixture:{FIXTURE_DIR / 'blogapp'}"
MIGRATION = str(FIXTURE_DIR / "blog_migration.script")


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestQueryCommand:
    def test_headlines_found_exit_zero(self, capsys):
        code, out, _ = run_cli(capsys, "query", SEARCH, "headline()")
        assert code == 0
        rows = json.loads(out)
        assert [r["id"] for r in rows[:3]] == ["r1-title", "r2-title", "r3-title"]

    def test_empty_result_exit_one(self, capsys):
        code, out, _ = run_cli(capsys, "query", SEARCH, 'contains("absent-zzz")')
        assert code == 1
        assert json.loads(out) == []

    def test_malformed_query_exit_two(self, capsys):
        code, out, err = run_cli(capsys, "query", SEARCH, "below(")
        assert code == 2
        assert "error" in err

    def test_missing_raster_for_color_exit_two(self, capsys):
        code, _, err = run_cli(capsys, "query", SEARCH, "color(white)")
        assert code == 2
        assert "raster" in err.lower()

    def test_stdout_is_json_whenever_exit_not_two(self, capsys):
        for query in ("headline()", 'contains("absent-zzz")', "typable()"):
            code, out, _ = run_cli(capsys, "query", SEARCH, query)
            assert code in (0, 1)
            json.loads(out)

    def test_text_output_mode(self, capsys):
        code, out, _ = run_cli(capsys, "query", SEARCH, "typable()", "--output", "text")
        assert code == 0
        assert "searchfield" in out

    def test_config_overrides_weights(self, capsys, tmp_path):
        config = tmp_path / "weights.json"
        config.write_text(json.dumps({"scale": 3.0}))
        _, out_scaled, _ = run_cli(capsys, "query", SEARCH, 'contains("toolkit")', "--config", str(config))
        _, out_plain, _ = run_cli(capsys, "query", SEARCH, 'contains("toolkit")')
        scaled = json.loads(out_scaled)
        plain = json.loads(out_plain)
        assert [r["id"] for r in scaled] == [r["id"] for r in plain]
        assert scaled[0]["weight"] == pytest.approx(3 * plain[0]["weight"], rel=1e-4)

    def test_attached_raster_enables_color(self, capsys, tmp_path):
        import numpy as np
        from visquery.snapshot import Raster
        png = tmp_path / "shot.png"
        png.write_bytes(Raster(np.full((600, 800, 3), 255, dtype=np.uint8)).to_png_bytes())
        code, out, _ = run_cli(capsys, "query", SEARCH, "color(white)", "--raster", str(png))
        assert code == 0
        assert json.loads(out)


class TestScriptParsing:
    def test_statements_parse(self):
        script = '''
        open page1
        query "text()"
        assert count == 3
        table "Username" cell 1 Mail
        '''
        statements = parse_script(script)
        assert [s.op for s in statements] == ["open", "query", "assert", "table"]

    def test_script_must_start_with_open(self):
        with pytest.raises(ScriptError):
            parse_script('query "text()"')

    def test_unknown_statement(self):
        with pytest.raises(ScriptError):
            parse_script("open x\nfrobnicate y")

    def test_bad_arity(self):
        with pytest.raises(ScriptError):
            parse_script('open x\ntype "only-one-arg"')


class TestRunCommand:
    def test_migration_script_succeeds(self, capsys, tmp_path):
        journal_path = tmp_path / "journal.jsonl"
        code, out, _ = run_cli(
            capsys, "run", MIGRATION, "--backend", BLOGAPP, "--journal", str(journal_path)
        )
        assert code == 0
        report = json.loads(out)
        assert report["ok"] is True
        typed = [e["payload"] for e in report["journal"] if e["verb"] == "type"]
        assert "Alpha Release Notes" in typed
        assert journal_path.read_text().count("\n") == len(report["journal"])

    def test_assert_failure_exit_one(self, capsys, tmp_path):
        script = tmp_path / "fail.script"
        script.write_text('open src_home\nquery "table()"\nassert nonempty\n')
        code, out, _ = run_cli(capsys, "run", str(script), "--backend", BLOGAPP)
        assert code == 1
        report = json.loads(out)
        assert report["ok"] is False
        assert "assertion" in report["error"]

    def test_script_without_open_exit_two(self, capsys, tmp_path):
        script = tmp_path / "bad.script"
        script.write_text('query "text()"\n')
        code, _, err = run_cli(capsys, "run", str(script), "--backend", BLOGAPP)
        assert code == 2
        assert "open" in err

    def test_element_not_found_exit_one(self, capsys, tmp_path):
        script = tmp_path / "miss.script"
        script.write_text('open src_home\nclick "Nonexistent Button"\n')
        code, out, _ = run_cli(capsys, "run", str(script), "--backend", BLOGAPP)
        assert code == 1

    def test_table_statement(self, capsys, tmp_path):
        app_dir = tmp_path / "tableapp"
        app_dir.mkdir()
        import shutil
        shutil.copy(TABLE, app_dir / "page.snap.json")
        (app_dir / "manifest.json").write_text(json.dumps({
            "snapshots": {"page": "page.snap.json"}, "transitions": []
        }))
        script = tmp_path / "t.script"
        script.write_text(
            'open page\n'
            'table "Username" cell 1 3\n'
            'assert text == "fixed"\n'
            'table "Username" cell 2 Mail\n'
            'assert text == "carol@example.org"\n'
        )
        code, out, _ = run_cli(capsys, "run", str(script), "--backend", f"fixture:{app_dir}")
        assert code == 0

    def test_waitfor_timeout_exit_one(self, capsys, tmp_path):
        script = tmp_path / "wait.script"
        script.write_text('open src_home\nwaitfor "table()" 2\n')
        code, out, _ = run_cli(capsys, "run", str(script), "--backend", BLOGAPP)
        assert code == 1


class TestWebDriverBackend:
    def test_run_script_over_stub_endpoint(self, capsys, tmp_path):
        from webdriver_stub import make_server
        from visquery.snapshot import serialize_snapshot
        from helpers import flat_element, single_page

        server, state, endpoint = make_server()
        try:
            page = single_page(
                flat_element("e7", tag="h1", text="Remote Headline", font=24,
                             attrs={"data-vsq-id": "e7"}),
                flat_element("pad", text="body copy", attrs={"data-vsq-id": "pad"}),
                url="http://remote.test/",
            )
            state.script_result = serialize_snapshot(page)
            extractor = tmp_path / "extractor.js"
            extractor.write_text("return '{}';")
            script = tmp_path / "remote.script"
            script.write_text(
                'open http://remote.test/\n'
                'query "headline()"\n'
                'assert count == 1\n'
                'first "contains(\\"remote\\")"\n'
            )
            code, out, _ = run_cli(
                capsys, "run", str(script),
                "--backend", f"webdriver:{endpoint}",
                "--extractor", str(extractor),
            )
            assert code == 0
            report = json.loads(out)
            assert report["ok"] is True
            assert report["results"][3]["id"] == "e7"
            paths = [p for _, p, _ in state.requests]
            assert any(p.endswith("/url") for p in paths)
            assert any(p.endswith("/execute/sync") for p in paths)
        finally:
            server.shutdown()
            server.server_close()


class TestBenchCommand:
    def test_reports_all_classes_and_sizes(self, capsys):
        code, out, _ = run_cli(capsys, "bench", BENCH)
        assert code == 0
        report = json.loads(out)
        classes = {r["query_class"] for r in report["rows"]}
        assert classes == {"kind", "contains", "color", "direction", "composite"}
        factors = sorted({r["factor"] for r in report["rows"]})
        assert factors == [1, 2, 4]
        color_rows = [r for r in report["rows"] if r["query_class"] == "color"]
        assert all("skipped" in r for r in color_rows)
        timed = [r for r in report["rows"] if "seconds" in r]
        assert all(r["seconds"] >= 0 for r in timed)
