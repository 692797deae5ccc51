import json

import pytest

from foliage.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from foliage.report import SCHEMA_VERSION, markdown_from_json

SMALL = ["--examples", "warped_nonharmonic", "--suite", "structural"]


def run_cli(tmp_path, *args, name="out"):
    path = tmp_path / name
    code = main([*args, "--out", str(path)])
    return code, path.read_text(encoding="utf-8")


class TestExitCodes:
    def test_not_applicable_only_is_success(self, tmp_path):
        code, text = run_cli(tmp_path, "verify", "--examples", "warped_nonharmonic", "--suite", "bochner")
        data = json.loads(text)
        assert code == EXIT_OK
        assert data["summary"]["pass"] == 0 and data["summary"]["not-applicable"] > 0

    def test_failure(self, tmp_path):
        code, text = run_cli(tmp_path, "verify", "--examples", "hopf", "--suite", "structural", "--tol-struct",
                             "1e-15")
        assert code == EXIT_FAIL and json.loads(text)["summary"]["fail"] > 0

    @pytest.mark.parametrize("args", [["verify", "--examples", "sphere"], ["verify", "--suite", "curvature"],
                                      ["verify", "--tol-struct", "-1"], ["verify", "--tol-sampled", "abc"],
                                      ["verify", "--resolution", "1"], ["verify", "--seed", "-3"], ["frobnicate"],
                                      []])
    def test_usage_errors(self, args, capsys):
        with pytest.raises(SystemExit) as exc:
            main(args)
        assert exc.value.code == EXIT_USAGE
        assert "error" in capsys.readouterr().err


class TestOutput:
    def test_json_is_byte_identical(self, tmp_path):
        _, a = run_cli(tmp_path, "verify", *SMALL, name="a.json")
        _, b = run_cli(tmp_path, "verify", *SMALL, name="b.json")
        assert a == b
        data = json.loads(a)
        assert data["schema_version"] == SCHEMA_VERSION
        assert data["config"]["examples"] == ["warped_nonharmonic"]

    def test_markdown_is_rendered_from_json(self, tmp_path):
        _, js = run_cli(tmp_path, "verify", *SMALL, name="a.json")
        _, md = run_cli(tmp_path, "verify", *SMALL, "--format", "markdown", name="a.md")
        assert md == markdown_from_json(json.loads(js))
        assert md.startswith(f"# Verification report (schema {SCHEMA_VERSION})")

    def test_stdout_and_summary(self, capsys):
        assert main(["verify", *SMALL]) == EXIT_OK
        out = capsys.readouterr()
        assert json.loads(out.out)["summary"]["fail"] == 0
        assert out.err.startswith("pass ")

    def test_seed_is_recorded(self, tmp_path):
        _, text = run_cli(tmp_path, "verify", *SMALL, "--seed", "7")
        assert json.loads(text)["config"]["seed"] == 7


class TestList:
    def test_json(self, tmp_path):
        code, text = run_cli(tmp_path, "list")
        names = [e["name"] for e in json.loads(text)["examples"]]
        assert code == EXIT_OK and "hopf" in names and len(names) == 6

    def test_markdown(self, tmp_path):
        _, text = run_cli(tmp_path, "list", "--format", "markdown")
        assert text.startswith("# Example gallery") and "## heisenberg3" in text
        assert "| quantity | value | origin | oracle |" in text


@pytest.fixture(scope="module")
def tables(full_report):
    return {row["example"]: row for row in full_report.to_dict()["tables"]}


class TestReport:
    def test_heisenberg_row(self, tables):
        row = tables["heisenberg3"]
        assert (row["q"], row["b1"], row["iso"], row["parallel"], row["aut"], row["aut_bound"]) == (2, 2, 2, 2, 1, 3)

    def test_hopf_row(self, tables):
        row = tables["hopf"]
        assert (row["b1"], row["iso"], row["parallel"], row["aut"]) == (0, 3, 0, 4)
        assert row["aut_bound"] == "not-applicable"
        assert row["ricci_T"] == [4.0, 4.0]

    def test_product_row(self, tables):
        row = tables["product_t3"]
        assert (row["q"], row["b1"], row["harmonic"]) == (2, 2, 2) and row["aut"] is None
        assert sum(row["residual_histogram"].values()) > 0

    def test_report_command_emits_rows(self, tmp_path):
        code, text = run_cli(tmp_path, "report", "--examples", "kronecker", "--suite", "structural")
        rows = json.loads(text)["tables"]
        assert code == EXIT_OK and [r["example"] for r in rows] == ["kronecker"]
        assert (rows[0]["q"], rows[0]["b1"], rows[0]["iso"]) == (1, 1, 1)

    def test_markdown_tables(self, tmp_path):
        _, md = run_cli(tmp_path, "report", "--examples", "kronecker", "--suite", "structural", "--format",
                        "markdown")
        assert "## Dimensions" in md and "| kronecker | 1 |" in md
