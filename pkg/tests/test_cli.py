import json
import subprocess
import sys
from pathlib import Path

import pytest

from predtopos.cli.fileformat import parse_string
from predtopos.cli.main import run
from predtopos.cli.report import Report
from predtopos.errors import DuplicateName, ParseError

DEMOS = Path(__file__).resolve().parent.parent / "demos"


def demo(name):
    return str(DEMOS / name)


def machine(*argv):
    rep, code, out = run([*argv, "--format", "machine"])
    return rep, code, out


class TestFileFormat:
    def test_empty_file(self):
        ws = parse_string("")
        assert len(ws) == 0 and ws.summary() == {}

    def test_comments_only(self):
        assert len(parse_string("# nothing here\n\n   # still nothing\n")) == 0

    def test_demo_bundle(self):
        ws = parse_string((DEMOS / "demo.site").read_text(), "demo.site")
        assert len(ws) == 3
        assert ws.summary() == {"category": ["arrow"], "presheaf": ["two_over_one"], "site": ["demo"]}
        assert ws.get("presheaf").sizes() == {"0": 1, "1": 2}

    def test_dangling_reference(self):
        with pytest.raises(ParseError, match="dangling reference to category 'nope'"):
            parse_string("site s on nope\n", "x.site")

    def test_error_carries_location(self):
        with pytest.raises(ParseError) as e:
            parse_string("category c\nobjects: a\nstalk a: x\n", "bad.cat")
        assert e.value.file == "bad.cat" and e.value.line == 3

    def test_duplicate_within_kind(self):
        with pytest.raises(DuplicateName):
            parse_string("set A: x\nset A: y\n")

    def test_names_are_per_kind(self):
        ws = parse_string("set f: x\nmap f: f -> f\n  x -> x\n")
        assert ws.summary() == {"set": ["f"], "map": ["f"]}

    def test_order_independent(self):
        text = "map f: B -> A\n  b -> a\nset A: a\nset B: b\n"
        assert parse_string(text).get("map", "f")("b") == "a"

    def test_relation_must_be_equivalence(self):
        with pytest.raises(ParseError, match="not symmetric: missing b~a"):
            parse_string("set X: a b\nrelation R on X: a~a b~b a~b\n")
        with pytest.raises(ParseError, match="not reflexive"):
            parse_string("set X: a b\nrelation R on X: a~a\n")

    def test_non_total_map(self):
        with pytest.raises(ParseError):
            parse_string("set A: a\nset B: b c\nmap f: B -> A\n  b -> a\n")

    def test_presheaf_laws_checked(self):
        text = "category arrow\nobjects: 0 1\narrows: u 0 1\npresheaf P on arrow\nstalk 1: x\nstalk 0: d\n"
        with pytest.raises(ParseError):
            parse_string(text)

    def test_implicit_category_named_by_stem(self):
        ws = parse_string((DEMOS / "arrow.cat").read_text(), "arrow.cat")
        assert ws.names("category") == ["arrow"]

    def test_space_from_subbasis(self):
        X = parse_string("space S: 0 1 2\nopen: 0 1\nopen: 1 2\n").get("space", "S")
        assert frozenset({"1"}) in X.opens


class TestReports:
    def test_round_trip(self):
        rep, _, out = machine("check-site", demo("demo.site"))
        assert Report.from_json(out) == rep
        assert Report.from_json(rep.to_json()).to_json() == out

    def test_deterministic(self):
        outs = {machine("sheafify", demo("demo.site"))[2] for _ in range(3)}
        assert len(outs) == 1
        assert "time" not in json.loads(next(iter(outs)))

    def test_sorted_keys(self):
        _, _, out = machine("saturate", demo("demo.site"))
        assert list(json.loads(out)) == ["bound", "command", "data", "provenance", "verdict", "witnesses"]

    def test_provenance_for_every_key(self):
        rep, _, _ = machine("check-site", demo("demo.site"))
        assert set(rep.provenance) == set(rep.data) - {"note"}

    def test_text_has_timing(self):
        _, _, out = run(["check-category", demo("arrow.cat")])
        assert "time:" in out

    def test_bad_verdict(self):
        with pytest.raises(ValueError):
            Report("x", "maybe")


class TestExitCodes:
    def test_pass(self):
        assert run(["check-category", demo("arrow.cat")])[1] == 0

    def test_fail(self, tmp_path):
        p = tmp_path / "broken.cat"
        p.write_text("objects: a b\narrows: f a b\n  g b a\ncompose:\n  g f = id_a\n")
        rep, code, _ = run(["check-category", str(p)])
        assert code == 1 and rep.verdict == "fail" and rep.witnesses

    def test_bounded(self):
        assert run(["wtype", demo("bintree.sig")])[1] == 2

    def test_strict(self):
        rep, code, _ = run(["wtype", demo("bintree.sig"), "--strict"])
        assert rep.verdict == "pass-up-to-bound" and code == 1

    @pytest.mark.parametrize("argv", [
        ["check-category", "/nonexistent/file.cat"],
        ["check-site", demo("demo.site"), demo("arrow.cat")],
        ["rp-roundtrip", demo("pi.map"), demo("f.map")],
        ["wtype", demo("bintree.sig"), "--cap", "-1"],
        ["no-such-command"],
        ["eval", demo("logic.txt"), "--formula", "missing"],
        ["eval", demo("logic.txt"), "--text", "forall p:Q. p = p"],
    ])
    def test_input_errors(self, argv):
        rep, code, out = run(argv)
        assert rep is None and code == 3 and out.startswith("error")

    def test_console_script(self):
        res = subprocess.run([sys.executable, "-m", "predtopos.cli.main", "check-category", demo("arrow.cat")],
                             capture_output=True, text=True)
        assert res.returncode == 0 and res.stdout.startswith("check-category: pass")


class TestCommands:
    def test_check_site(self):
        rep, code, _ = machine("check-site", demo("demo.site"))
        assert code == 0
        assert rep.data["axiom C"] and not rep.data["axiom M"] and rep.data["collection site"]

    def test_saturate(self):
        rep, _, _ = machine("saturate", demo("demo.site"), "--depth", "2")
        assert rep.data["sieves"] == {"0": [["id_0"]], "1": [["u"], ["id_1", "u"]]}
        assert [L["1"] for L in rep.data["COV level sizes"]] == [1, 2, 3]

    def test_sheafify(self):
        rep, code, _ = machine("sheafify", demo("demo.site"), "--bound", "2")
        assert code == 2
        assert rep.data["stalk sizes"] == {"0": 1, "1": 1} and rep.data["universal property"]

    def test_wtype(self):
        rep, _, _ = machine("wtype", demo("bintree.sig"))
        assert rep.data["chain"] == [0, 1, 2, 5, 26] and rep.bound == {"cap": 4}

    def test_amc_square(self):
        rep, code, _ = machine("amc-square", demo("f.map"))
        assert code == 0 and rep.data["covering"] and rep.data["strong collection"]

    def test_rp_roundtrip(self):
        rep, code, _ = machine("rp-roundtrip", demo("pi.map"), demo("f.map"), "--map", "f", "--rep", "pi")
        assert code == 0 and rep.data["map in generated class"]

    def test_complete(self):
        rep, code, _ = machine("complete", demo("quotient.rel"), "--bound", "2")
        assert code == 2 and all(rep.data["checks"].values())
        assert all(rep.data["quotient R"].values())

    def test_eval(self):
        rep, code, _ = machine("eval", demo("logic.txt"), "--formula", "lem")
        assert code == 1 and rep.data["forced at"] == {"0": True, "1": False}
        rep, code, _ = machine("eval", demo("logic.txt"), "--formula", "ext", "--stage", "1")
        assert code == 0
