import json
import subprocess
import sys

from locdiv.cli import main
from locdiv.crs import DATA


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_aperiodic(capsys):
    code, out, _ = run(capsys, "monoid", "check-aperiodic", DATA / "u1.json")
    assert code == 0 and "aperiodic: true" in out
    code, out, _ = run(capsys, "monoid", "check-aperiodic", DATA / "z3.json")
    assert code == 0 and "aperiodic: false" in out


def test_monoid_info(capsys):
    code, out, _ = run(capsys, "monoid", "info", DATA / "u1.json")
    assert code == 0 and out


def test_synth_ltl_contains_a(capsys):
    code, out, _ = run(capsys, "synth", "ltl", "--dfa", DATA / "contains-a.json", "--check-maxlen", 8)
    assert code == 0
    assert "oracle agreement 510/510" in out


def test_synth_sd_from_regex(capsys):
    code, out, _ = run(capsys, "synth", "sd", "--regex", "(ab)*", "--alphabet", "ab")
    assert code == 0
    assert "511/511" in out


def test_synth_rejects_group_language(capsys):
    code, _, err = run(capsys, "synth", "ltl", "--regex", "(aa)*", "--alphabet", "a")
    assert code == 2 and "error" in err


def test_crs_classes_l6(capsys):
    code, out, _ = run(capsys, "crs", "classes", "--system", DATA / "L6-T.txt")
    assert code == 0
    assert "max-irreducible-length: 16" in out


def test_crs_classes_l3(capsys):
    code, out, _ = run(capsys, "crs", "classes", "--system", DATA / "L3-S.txt")
    assert "classes: 2, max-irreducible-length: 1" in out


def test_crs_build(capsys):
    code, out, _ = run(capsys, "crs", "build", "--hom", DATA / "u1-hom.json", "--weights", "a=2,b=1")
    assert code == 0
    assert "a -> _" in out


def test_rewrite_nf(capsys):
    code, out, _ = run(capsys, "rewrite", "nf", "--system", DATA / "L3-S.txt", "--word", "aaaa")
    assert code == 0 and out.strip()


def test_check_confluence_exit_codes(capsys):
    assert run(capsys, "check", "confluence", "--system", DATA / "L6-T.txt")[0] == 0
    code, out, _ = run(capsys, "check", "confluence", "--system", DATA / "L6-naive.txt", "--show", 100)
    assert code == 1 and "peak aabb: b ->* b but a ->* a" in out


def test_check_sync_delay(capsys):
    code, out, _ = run(capsys, "check", "sync-delay", "--expr", "('a' . 'b')", "--delay", 0)
    assert code == 1
    code, _, _ = run(capsys, "check", "sync-delay", "--expr", "('a' . 'b')", "--delay", 1)
    assert code == 0


def test_forest_build(capsys):
    code, out, _ = run(capsys, "forest", "build", "--hom", DATA / "z3-hom.json", "--word", "abaab", "--validate", "--stats")
    assert code == 0 and "height" in out


def test_convert_and_eval(capsys):
    code, out, _ = run(capsys, "convert", "sd-to-starfree", "--expr", "('a' . 'b')*{1}")
    assert code == 0 and "~" in out
    code, out, _ = run(capsys, "eval", "ltl", "--formula", "F 'b'", "--word", "aab")
    assert code == 0 and "true" in out


def test_bad_inputs_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "monoid", "info", bad)
    assert code == 2 and "bad.json:1" in err
    assert run(capsys, "monoid", "info", tmp_path / "missing.json")[0] == 2
    broken = tmp_path / "sys.txt"
    broken.write_text("aa -> a\nnonsense\n")
    code, _, err = run(capsys, "crs", "classes", "--system", broken)
    assert code == 2 and ":2" in err
    assert run(capsys, "nosuch")[0] == 2


def test_json_output_is_deterministic(capsys):
    argv = ["synth", "sd", "--dfa", DATA / "ab-star.json", "--json"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    data = json.loads(first)
    assert data["ok"] is True and data["verification"]


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "locdiv.cli", "monoid", "check-aperiodic", str(DATA / "u1.json")],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "aperiodic: true" in out.stdout
