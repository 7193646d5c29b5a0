"""Command-line behaviour: output formats, exit codes, file handling.

The client talks to an in-process service instance by default, so these
tests cover the full request path without a running server; one test boots
a real server to cover ``--server`` and the uvicorn wiring.
"""

from __future__ import annotations

import json
import socket
import threading
import time
from pathlib import Path

import pytest

from sparqlprov.cli import main

from .conftest import ACCOUNTS_DATA, ACCOUNTS_QUERY

DEMO = Path(__file__).resolve().parent.parent / "demo"

A1_TSV = (
    "?acc\t?home\t?who\tprovenance\n"
    "<http://bank>\t<http://bank/yourmoney>\t<http://people/david>\tg0*t1*t3\n"
    "<http://bank>\t\t<http://people/david>\tg0*t1*(1-t1*t3)\n"
    "<http://games>\t\t<http://people/felix>\tg0*t2\n"
)


@pytest.fixture()
def accounts_files(tmp_path):
    data = tmp_path / "data.nq"
    query = tmp_path / "query.rq"
    data.write_text(ACCOUNTS_DATA)
    query.write_text(ACCOUNTS_QUERY)
    return str(data), str(query)


def test_run_tsv_golden(accounts_files, capsys):
    data, query = accounts_files
    assert main(["run", "--data", data, "--query", query]) == 0
    assert capsys.readouterr().out == A1_TSV


def test_run_is_byte_deterministic(accounts_files, capsys):
    data, query = accounts_files
    main(["run", "--data", data, "--query", query, "--format", "json"])
    first = capsys.readouterr().out
    main(["run", "--data", data, "--query", query, "--format", "json"])
    assert capsys.readouterr().out == first


def test_run_bool_prints_trust_column(accounts_files, capsys):
    data, query = accounts_files
    assert main([
        "run", "--data", data, "--query", query,
        "--semiring", "bool", "--trust", "t3=0",
    ]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].endswith("provenance\ttrusted")
    assert [line.rsplit("\t", 1)[1] for line in lines[1:]] == ["f", "t", "t"]


def test_run_bool_trust_default_flag(accounts_files, capsys):
    data, query = accounts_files
    assert main([
        "run", "--data", data, "--query", query,
        "--semiring", "bool", "--trust", "g0=1", "--trust-default", "0",
    ]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.rsplit("\t", 1)[1] for line in lines[1:]] == ["f", "f", "f"]


def test_run_nat_prints_counts(accounts_files, capsys):
    data, query = accounts_files
    assert main(["run", "--data", data, "--query", query, "--semiring", "nat"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "?acc\t?home\t?who\tcount"
    assert len(lines) == 3  # the conditional row evaluates to zero and is gone


def test_run_json_shape(accounts_files, capsys):
    data, query = accounts_files
    assert main(["run", "--data", data, "--query", query, "--format", "json"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["vars"] == ["acc", "home", "who"]
    assert body["rows"][1]["bindings"]["home"] is None
    assert body["rows"][1]["provenance"] == "g0*t1*(1-t1*t3)"
    assert "UNB" not in json.dumps(body)


def test_run_empty_dataset_prints_header_only(accounts_files, tmp_path, capsys):
    _, query = accounts_files
    empty = tmp_path / "empty.nq"
    empty.write_text("")
    assert main(["run", "--data", str(empty), "--query", query]) == 0
    assert capsys.readouterr().out == "?acc\t?home\t?who\tprovenance\n"


def test_parse_and_translate_print_trees(accounts_files, capsys):
    _, query = accounts_files
    assert main(["parse", "--query", query]) == 0
    assert capsys.readouterr().out.startswith("(query")
    assert main(["translate", "--query", query]) == 0
    assert capsys.readouterr().out.startswith("project [?acc ?home ?who]")


def test_check_passes_on_example(accounts_files, capsys):
    data, query = accounts_files
    assert main(["check", "--data", data, "--query", query]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "?acc\t?home\t?who\tengine\treference"
    assert all(line.endswith("1\t1") for line in lines[1:])


def test_check_fails_on_corrupted_translation(accounts_files, capsys, monkeypatch):
    import sparqlprov.pipeline as pipeline
    from sparqlprov import krel as ra

    real = pipeline.translate_query
    monkeypatch.setattr(
        pipeline, "translate_query", lambda q: ra.Union(real(q), real(q))
    )
    data, query = accounts_files
    assert main(["check", "--data", data, "--query", query]) == 1
    captured = capsys.readouterr()
    assert "differ" in captured.err


def test_nat_counts_match_check_reference_on_shipped_examples(capsys):
    pairs = [
        (DEMO / "accounts.nq", DEMO / "accounts.rq"),
        (DEMO / "accounts_no_homepage.nq", DEMO / "accounts.rq"),
        (DEMO / "graphs.nq", DEMO / "graphs.rq"),
    ]
    for data, query in pairs:
        assert main(["run", "--data", str(data), "--query", str(query),
                     "--semiring", "nat"]) == 0
        nat_lines = capsys.readouterr().out.splitlines()[1:]
        assert main(["check", "--data", str(data), "--query", str(query)]) == 0
        check_lines = capsys.readouterr().out.splitlines()[1:]
        nat_counts = {
            tuple(line.split("\t")[:-1]): int(line.split("\t")[-1]) for line in nat_lines
        }
        ref_counts = {
            tuple(line.split("\t")[:-2]): int(line.split("\t")[-1]) for line in check_lines
        }
        assert nat_counts == ref_counts, str(query)


def test_missing_file_exits_2(accounts_files, capsys):
    data, _ = accounts_files
    assert main(["run", "--data", data, "--query", "/nonexistent.rq"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_bad_query_exits_1(accounts_files, tmp_path, capsys):
    data, _ = accounts_files
    bad = tmp_path / "bad.rq"
    bad.write_text("SELECT ?x WHERE { ?x")
    assert main(["run", "--data", data, "--query", str(bad)]) == 1
    assert "QuerySyntaxError" in capsys.readouterr().err


def test_bad_trust_spec_exits_1(accounts_files, capsys):
    data, query = accounts_files
    assert main([
        "run", "--data", data, "--query", query, "--trust", "t3=maybe"
    ]) == 1
    assert "bad trust entry" in capsys.readouterr().err


def test_usage_error_exits_1(accounts_files, capsys):
    _, query = accounts_files
    with pytest.raises(SystemExit) as exc:
        main(["run", "--query", query])
    assert exc.value.code == 1


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_server_flag_against_live_service(accounts_files, capsys):
    import uvicorn

    from sparqlprov.service import app

    port = _free_port()
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        deadline = time.time() + 10
        while not server.started:
            if time.time() > deadline:
                pytest.fail("server did not start")
            time.sleep(0.02)
        data, query = accounts_files
        assert main([
            "run", "--data", data, "--query", query,
            "--server", f"http://127.0.0.1:{port}",
        ]) == 0
        assert capsys.readouterr().out == A1_TSV
    finally:
        server.should_exit = True
        thread.join(timeout=5)


def test_unreachable_server_exits_2(accounts_files, capsys):
    data, query = accounts_files
    port = _free_port()
    assert main([
        "run", "--data", data, "--query", query,
        "--server", f"http://127.0.0.1:{port}",
    ]) == 2
    assert "cannot reach server" in capsys.readouterr().err
