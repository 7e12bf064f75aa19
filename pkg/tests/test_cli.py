import json

import pytest

from fixtures import (book_order_service, gated_false_service,
                      treat_command_block)
from gnets import algebra, io
from gnets.cli import main


@pytest.fixture
def registry_dir(tmp_path):
    reg_dir = tmp_path / "registry"
    reg_dir.mkdir()
    for name, op in (("a", "op-a"), ("b", "op-b"), ("c", "op-c")):
        ws = algebra.with_request_method(algebra.atomic(name, op))
        io.save_service(ws, reg_dir / f"{name}.json")
    io.save_block("B", treat_command_block(), reg_dir / "B.block.json")
    return reg_dir


@pytest.fixture
def book_order_path(tmp_path):
    path = tmp_path / "book-order.json"
    io.save_service(book_order_service(), path)
    return path


def compose_file(tmp_path, text):
    path = tmp_path / "term.gnet"
    path.write_text(text)
    return path


class TestValidate:
    def test_valid(self, book_order_path, capsys):
        assert main(["validate", str(book_order_path)]) == 0
        assert "ok" in capsys.readouterr().out

    def test_violations_exit_1(self, tmp_path, capsys):
        d = io.service_to_dict(book_order_service())
        d["net"]["is"]["arcs"].append(["P1", "P2"])
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(d))
        assert main(["validate", str(path)]) == 1
        assert "non-bipartite arc" in capsys.readouterr().out

    def test_missing_file_exit_2(self, tmp_path):
        assert main(["validate", str(tmp_path / "none.json")]) == 2


class TestCompose:
    def test_writes_composed_service(self, tmp_path, registry_dir):
        term = compose_file(tmp_path, "seq(a, b)")
        out = tmp_path / "out.json"
        code = main(["compose", str(term), "--registry", str(registry_dir),
                     "--out", str(out)])
        assert code == 0
        ws = io.load_service(out)
        struct = ws.net.internal
        assert (len(struct.places), len(struct.transitions),
                len(struct.arcs)) == (3, 2, 4)

    def test_unknown_service_exit_1(self, tmp_path, registry_dir, capsys):
        term = compose_file(tmp_path, "seq(a, ghost)")
        code = main(["compose", str(term), "--registry", str(registry_dir)])
        assert code == 1
        assert "ghost" in capsys.readouterr().err

    def test_empty_replacement_exit_1(self, tmp_path, registry_dir):
        term = compose_file(tmp_path, "replace(seq(a, b), a, empty)")
        assert main(["compose", str(term), "--registry",
                     str(registry_dir)]) == 1

    def test_registry_from_environment(self, tmp_path, registry_dir,
                                       monkeypatch, capsys):
        monkeypatch.setenv("GNET_REGISTRY", str(registry_dir))
        term = compose_file(tmp_path, "par(a, b)")
        assert main(["compose", str(term)]) == 0
        assert '"Par(a,b)"' in capsys.readouterr().out


class TestSimulate:
    def test_goal_exit_0(self, book_order_path, capsys):
        code = main(["simulate", str(book_order_path), "--args", "1"])
        assert code == 0
        assert "outcome: Goal" in capsys.readouterr().out

    def test_deadlock_exit_1(self, tmp_path, capsys):
        path = tmp_path / "gated.json"
        io.save_service(gated_false_service(), path)
        assert main(["simulate", str(path)]) == 1
        assert "outcome: Deadlock" in capsys.readouterr().out

    def test_step_limit_exit_3(self, tmp_path, registry_dir):
        term = compose_file(tmp_path, "iter(a)")
        out = tmp_path / "loop.json"
        main(["compose", str(term), "--registry", str(registry_dir),
              "--out", str(out)])
        code = main(["simulate", str(out), "--registry", str(registry_dir),
                     "--max-steps", "5"])
        assert code == 3

    def test_seeded_random_reproducible(self, book_order_path, capsys):
        def output(seed):
            main(["simulate", str(book_order_path), "--args", "1",
                  "--policy", "random", "--seed", str(seed)])
            return capsys.readouterr().out

        assert output(7) == output(7)

    def test_json_trace(self, book_order_path, tmp_path):
        out = tmp_path / "trace.json"
        main(["simulate", str(book_order_path), "--args", "1", "--json",
              "--out", str(out)])
        data = json.loads(out.read_text())
        assert data["outcome"] == "Goal"
        assert data["steps"]


class TestAnalyze:
    def test_composition_analyzes_clean(self, tmp_path, registry_dir,
                                        capsys):
        term = compose_file(tmp_path, "anyseq(a, b)")
        out = tmp_path / "anyseq.json"
        main(["compose", str(term), "--registry", str(registry_dir),
              "--out", str(out)])
        code = main(["analyze", str(out), "--registry", str(registry_dir)])
        assert code == 0
        text = capsys.readouterr().out
        assert "deadlocks: 0" in text
        assert "goalReachable: True" in text

    def test_deadlock_exit_1(self, tmp_path, capsys):
        path = tmp_path / "gated.json"
        io.save_service(gated_false_service(), path)
        assert main(["analyze", str(path)]) == 1
        assert "deadlocks: 1" in capsys.readouterr().out

    def test_truncation_exit_4(self, book_order_path, capsys):
        code = main(["analyze", str(book_order_path), "--args", "1",
                     "--max-states", "2"])
        assert code == 4
        assert "truncated: True" in capsys.readouterr().out


class TestExport:
    def test_prod(self, book_order_path, tmp_path, capsys):
        out = tmp_path / "net.prod"
        assert main(["export", str(book_order_path), "--format", "prod",
                     "--out", str(out)]) == 0
        text = out.read_text()
        assert text.count("#trans") == 13
        assert "gate Available == true;" in text

    def test_dot(self, book_order_path, capsys):
        assert main(["export", str(book_order_path), "--format", "dot"]) == 0
        text = capsys.readouterr().out
        assert text.startswith("digraph")
        assert text.count("shape=box") == 7

    def test_unknown_format_exit_2(self, book_order_path):
        with pytest.raises(SystemExit) as exc:
            main(["export", str(book_order_path), "--format", "pdf"])
        assert exc.value.code == 2
