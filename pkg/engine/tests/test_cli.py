"""
Command-line tests.
"""

import json
from pathlib import Path

from unittest.mock import patch

from app.cli import main
from app.services.table import RowResult, TableRow

DATA = Path(__file__).resolve().parent.parent / "app" / "data" / "representations"
TORUS = ["--genus", "1", "--word", "c1 c2 | ^6"]


class TestInvariantCommand:
    """Tests for `invariant`."""

    def test_torus(self, capsys):
        """Should print the E8 class for (c1 c2)^6 and exit 0."""
        assert main(["invariant", *TORUS]) == 0
        out = capsys.readouterr().out
        assert "E8 0^14" in out
        assert "kernel rank:  22" in out
        assert "M_z rank:     8" in out

    def test_json(self, capsys):
        """Should emit the result as JSON."""
        assert main(["invariant", *TORUS, "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["class_string"] == "E8 0^14"
        assert data["form"]["sigma"] == -8
        assert data["sigma_plus_m_minus_mns"] == -8

    def test_out_file(self, tmp_path, capsys):
        """Should write to --out instead of stdout."""
        out = tmp_path / "result.txt"
        assert main(["invariant", *TORUS, "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        assert "E8 0^14" in out.read_text(encoding="utf-8")

    def test_no_source(self, capsys):
        """Should exit 2 without a tuple source."""
        assert main(["invariant", "--genus", "1"]) == 2
        assert "usage error" in capsys.readouterr().err

    def test_two_sources(self):
        """Should exit 2 when two tuple sources are given."""
        assert main(["invariant", "--genus", "2", "--builtin", "xi1", "--word", "c1"]) == 2

    def test_negative_letter(self, capsys):
        """Should exit 2 on inverse letters in a tuple word."""
        assert main(["invariant", "--genus", "1", "--word", "c1 c2^-1"]) == 2
        assert "NEGATIVE_LETTER" in capsys.readouterr().err

    def test_product_not_identity(self, capsys):
        """Should exit 1 when the product is not the identity."""
        assert main(["invariant", "--genus", "1", "--word", "c1 c2 | ^3"]) == 1
        assert "PRODUCT_NOT_IDENTITY" in capsys.readouterr().err

    def test_packaged_representation(self, capsys):
        """Should evaluate in a packaged representation file."""
        argv = ["invariant", "--genus", "1", "--word", "c1 c2 | ^3", "--rep", "quantum_g1_reduced_omega"]
        assert main(argv) == 0
        assert "Fpy:2" in capsys.readouterr().out

    def test_reduced_quantum_with_psi(self, capsys):
        """Should accept psi from a file for the reduced quantum representation."""
        argv = [
            "invariant", "--genus", "1", "--word", "c1 c2 | ^3",
            "--rep", "quantum-g1", "--reduce", "--psi-file", str(DATA / "quantum_g1_reduced_nu.json"),
        ]
        assert main(argv) == 0

    def test_reduced_quantum_without_psi(self, capsys):
        """Should exit 1 when the representation carries no psi."""
        argv = ["invariant", "--genus", "1", "--word", "c1 c2 | ^3", "--rep", "quantum-g1", "--reduce"]
        assert main(argv) == 1
        assert "NO_PSI" in capsys.readouterr().err

    def test_unknown_flag(self):
        """Should exit 2 on argparse errors."""
        assert main(["invariant", "--bogus"]) == 2


class TestSignatureCommand:
    """Tests for `signature`."""

    def test_torus(self, capsys):
        """Should report agreeing signatures."""
        assert main(["signature", *TORUS]) == 0
        out = capsys.readouterr().out
        assert "Meyer sum:     -8" in out
        assert "agree:         yes" in out


class TestFuzzCommand:
    """Tests for `fuzz`."""

    def test_zero_steps(self):
        """Should exit 2 for an empty walk."""
        assert main(["fuzz", *TORUS, "--steps", "0"]) == 2

    def test_short_walk(self, capsys):
        """Should pass a short walk with single-move checks."""
        argv = ["fuzz", *TORUS, "--steps", "10", "--check-every", "5", "--move-pairs", "2", "--single-moves", "2"]
        assert main(argv) == 0
        out = capsys.readouterr().out
        assert "single moves: 2, failures 0" in out


class TestMovesCommand:
    """Tests for `moves`."""

    def test_apply_script(self, tmp_path, capsys):
        """Should print the moved tuple document."""
        tuple_file = tmp_path / "t.json"
        tuple_file.write_text(json.dumps({"entries": [{"base": "c1"}, {"base": "c2"}]}), encoding="utf-8")
        script = tmp_path / "moves.txt"
        script.write_text("# swap\nforward 1\n", encoding="utf-8")

        assert main(["moves", "--tuple-file", str(tuple_file), "--script", str(script)]) == 0

        document = json.loads(capsys.readouterr().out)
        assert document["entries"] == [{"base": "c2", "conj": []}, {"base": "c1", "conj": ["c2"]}]

    def test_missing_script(self, tmp_path):
        """Should exit 2 without a script."""
        tuple_file = tmp_path / "t.json"
        tuple_file.write_text(json.dumps({"entries": [{"base": "c1"}]}), encoding="utf-8")
        assert main(["moves", "--tuple-file", str(tuple_file)]) == 2


class TestTableCommand:
    """Tests for `table`."""

    def test_unknown_genus(self):
        """Should exit 2 for genus without table rows."""
        assert main(["table", "--genus", "4"]) == 2

    def test_table(self, capsys):
        """Should render the rows returned by compute_table."""
        row = TableRow(
            fibration="$\\xi_{CK}$", genus=3, type=(16, 0), sigma=-8,
            q_omega_z="$ E_80^{84}$", q_spin_odd="", q_spin_even="",
        )
        with patch("app.cli.compute_table", return_value=[RowResult(row)]) as mock:
            assert main(["table", "--genus", "3", "--workers", "1"]) == 0
        assert mock.call_args.args[0] == 3
        assert mock.call_args.kwargs["workers"] == 1
        assert "xi_CK" in capsys.readouterr().out
