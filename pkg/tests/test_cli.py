import json
import subprocess
import sys

import pytest
from hypothesis import given

from piggyrepair.cli import EXIT_BUDGET, EXIT_OK, EXIT_PARAM, EXIT_PARSE, EXIT_VERIFY, main
from piggyrepair.construct import fig3_fixture
from piggyrepair.formats import (
    ParseError,
    code_from_dict,
    code_to_dict,
    read_code,
    read_scheme,
    scheme_from_dict,
    scheme_to_dict,
    write_code,
    write_scheme,
)
from piggyrepair.repair import RepairScheme

from test_piggyback import codes

CODE, FIG3 = fig3_fixture()


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return rc, out, err


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


@pytest.fixture
def fig3_dir(tmp_path, capsys):
    assert run(capsys, "gen", "--fixture", "fig3", "--out", tmp_path)[0] == EXIT_OK
    return tmp_path


@given(codes())
def test_code_round_trip(code):
    assert code_from_dict(json.loads(json.dumps(code_to_dict(code)))) == code


def test_scheme_round_trip(tmp_path):
    write_code(tmp_path / "c.json", CODE)
    code = read_code(tmp_path / "c.json")
    for node, s in FIG3.items():
        write_scheme(tmp_path / f"{node}.json", s)
        assert read_scheme(tmp_path / f"{node}.json", code) == s
        assert scheme_from_dict(scheme_to_dict(s), code) == s


@pytest.mark.parametrize(
    "mutate,needle",
    [
        (lambda d: d.pop("q"), "missing field 'q'"),
        (lambda d: d.update(k="3"), "'k' must be an integer"),
        (lambda d: d["F"][1].__setitem__(2, 9), "F[1][2]: 9 is not a residue mod 7"),
        (lambda d: d["F"].pop(), "expected 3 rows"),
        (lambda d: d.update(kind="other"), "'kind'"),
        (lambda d: d.update(q=8), "'q'"),
    ],
)
def test_code_parse_diagnostics(mutate, needle):
    doc = code_to_dict(CODE)
    mutate(doc)
    with pytest.raises(ParseError, match=None) as exc:
        code_from_dict(doc)
    assert needle in str(exc.value)


def test_json_syntax_error_has_position(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "q": 7,\n  "n": \n}\n', encoding="utf-8")
    rc, _, err = run(capsys, "verify", "--code", p, "--scheme", p)
    assert rc == EXIT_PARSE and "line 4" in err


def test_scheme_parse_diagnostics():
    doc = scheme_to_dict(FIG3[0])
    doc["matrices"].pop()
    with pytest.raises(ParseError, match="expected 2 matrices"):
        scheme_from_dict(doc, CODE)


def test_gen_fixture_is_byte_stable(tmp_path, capsys):
    a = run(capsys, "gen", "--n", 6, "--k", 3, "--t", 2, "--q", 7, "--fixture", "fig3")[1]
    b = run(capsys, "gen", "--fixture", "fig3")[1]
    assert a == b and code_from_dict(json.loads(a)) == CODE


def test_gen_fixture_writes_schemes(fig3_dir):
    assert len(list(fig3_dir.glob("scheme_*.json"))) == 6


def test_gen_random_needs_seed(capsys):
    rc, _, err = run(capsys, "gen", "--n", 5, "--k", 3, "--t", 2, "--q", 5)
    assert rc == EXIT_PARAM and "--seed" in err


def test_gen_is_deterministic(capsys):
    argv = ["gen", "--n", 5, "--k", 3, "--t", 2, "--q", 5, "--seed", 11]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_gen_q2_cites_bound(capsys):
    rc, _, err = run(capsys, "gen", "--n", 4, "--k", 2, "--t", 2, "--q", 2)
    assert rc == EXIT_PARAM and "q >= k+1" in err


def test_gen_k2t2_schemes_verify(tmp_path, capsys):
    rc, out, _ = run(capsys, "gen", "--n", 4, "--k", 2, "--t", 2, "--q", 5, "--construct", "k2t2", "--out", tmp_path)
    assert rc == EXIT_OK and kv(out)["schemes"] == "4"
    for p in sorted(tmp_path.glob("scheme_*.json")):
        rc, out, _ = run(capsys, "verify", "--code", tmp_path / "code.json", "--scheme", p)
        assert rc == EXIT_OK and kv(out)["bandwidth"] == "3" and kv(out)["perfect"] == "true"


def test_verify_fig3(fig3_dir, capsys):
    rc, out, _ = run(capsys, "verify", "--code", fig3_dir / "code.json", "--scheme", fig3_dir / "scheme_0.json")
    d = kv(out)
    assert rc == EXIT_OK and d["status"] == "valid" and d["bandwidth"] == "4"
    assert {k for k in d if k.startswith("query.")} == {"query.1", "query.2", "query.3", "query.5"}


def _tamper(path, fn):
    doc = json.loads(path.read_text())
    fn(doc)
    path.write_text(json.dumps(doc))


def test_verify_support_violation(fig3_dir, capsys):
    p = fig3_dir / "scheme_0.json"

    def f(doc):
        doc["matrices"][0][4] = [1, 0]

    _tamper(p, f)
    rc, out, _ = run(capsys, "verify", "--code", fig3_dir / "code.json", "--scheme", p)
    assert rc == EXIT_VERIFY and kv(out)["condition"] == "support-violation"


def test_verify_not_dual(fig3_dir, capsys):
    p = fig3_dir / "scheme_0.json"
    s = FIG3[0]
    row = min(s.repair_set)

    def f(doc):
        doc["matrices"][1][row][0] = (doc["matrices"][1][row][0] + 1) % 7

    _tamper(p, f)
    rc, out, err = run(capsys, "verify", "--code", fig3_dir / "code.json", "--scheme", p)
    assert rc == EXIT_VERIFY and kv(out)["condition"] == "not-dual"
    assert "not-dual at (row=" in out and "matrix=1" in out and err


def test_verify_rank_deficient(fig3_dir, capsys):
    p = fig3_dir / "scheme_0.json"
    zero = RepairScheme(CODE, 0, FIG3[0].repair_set, tuple(m.scale(0) for m in FIG3[0].matrices))
    write_scheme(p, zero)
    rc, out, _ = run(capsys, "verify", "--code", fig3_dir / "code.json", "--scheme", p)
    assert rc == EXIT_VERIFY and kv(out)["condition"] == "rank-deficient-at-i*"


def test_search_found(fig3_dir, tmp_path, capsys):
    out_p = tmp_path / "found.json"
    rc, out, _ = run(capsys, "search", "--code", fig3_dir / "code.json", "--failed", 0,
                     "--set", "1,2,3,5", "--target", 4, "--out", out_p)
    assert rc == EXIT_OK and kv(out)["status"] == "found"
    rc, out, _ = run(capsys, "verify", "--code", fig3_dir / "code.json", "--scheme", out_p)
    assert rc == EXIT_OK and kv(out)["bandwidth"] == "4"


def test_search_exhausted_is_success(tmp_path, capsys):
    run(capsys, "gen", "--n", 5, "--k", 3, "--t", 2, "--q", 5, "--plain", "--out", tmp_path)
    rc, out, _ = run(capsys, "search", "--code", tmp_path / "code.json", "--failed", 0, "--set", "1,2,3")
    assert rc == EXIT_OK and kv(out)["status"] == "exhausted"


def test_search_budget(fig3_dir, capsys):
    rc, _, err = run(capsys, "search", "--code", fig3_dir / "code.json", "--failed", 0, "--max-candidates", 5)
    assert rc == EXIT_BUDGET and err


def test_reduce(tmp_path, capsys):
    src = tmp_path / "k2t3"
    rc, _, _ = run(capsys, "gen", "--n", 6, "--k", 2, "--t", 3, "--q", 31, "--kind", "lineback",
                   "--construct", "lineback", "--seed", 0, "--out", src)
    assert rc == EXIT_OK
    schemes = sorted(src.glob("scheme_*.json"))
    dst = tmp_path / "k2t2"
    rc, out, _ = run(capsys, "reduce", "--code", src / "code.json", "--schemes", *schemes, "--out", dst)
    assert rc == EXIT_OK and out.startswith("t=2\n")
    assert all(line.endswith("bandwidth=4->3") for line in out.splitlines()[1:])
    assert read_code(dst / "code.json").t == 2
    for p in sorted(dst.glob("scheme_*.json")):
        rc, out, _ = run(capsys, "verify", "--code", dst / "code.json", "--scheme", p)
        assert rc == EXIT_OK and int(kv(out)["bandwidth"]) <= 3


def test_lineback_needs_seed(capsys):
    rc, _, _ = run(capsys, "gen", "--n", 5, "--k", 2, "--t", 2, "--q", 23, "--construct", "lineback")
    assert rc == EXIT_PARAM


def test_lineback_budget_exit(capsys):
    rc, _, err = run(capsys, "gen", "--n", 5, "--k", 2, "--t", 2, "--q", 5, "--construct", "lineback",
                     "--seed", 0, "--retries", 1)
    assert rc == EXIT_BUDGET and "budget" in err


def test_simulate_fig3(fig3_dir, capsys):
    rc, out, _ = run(capsys, "simulate", "--code", fig3_dir / "code.json", "--stripes", 10, "--fail", 3)
    d = kv(out)
    assert rc == EXIT_OK and d["total"] == "40" and d["baseline"] == "60" and d["restored_exact"] == "true"


def test_simulate_with_schemes_and_json(fig3_dir, tmp_path, capsys):
    rep = tmp_path / "r.json"
    rc, out, _ = run(capsys, "simulate", "--code", fig3_dir / "code.json", "--fail", 5, "--seed", 3,
                     "--schemes", *sorted(fig3_dir.glob("scheme_*.json")), "--json", "--report", rep)
    assert rc == EXIT_OK and json.loads(out) == json.loads(rep.read_text())
    assert json.loads(out)["savings"] == "1/3"


def test_simulate_payload(fig3_dir, tmp_path, capsys):
    payload = tmp_path / "data.bin"
    payload.write_bytes(b"\x00\xff" * 50)
    rc, out, _ = run(capsys, "simulate", "--code", fig3_dir / "code.json", "--fail", 1, "--payload", payload)
    assert rc == EXIT_OK and kv(out)["stripes"] == "50"
    rc, _, _ = run(capsys, "simulate", "--code", fig3_dir / "code.json", "--fail", 1, "--payload", tmp_path / "nope")
    assert rc == EXIT_PARSE


def test_simulate_no_scheme(fig3_dir, capsys):
    rc, _, err = run(capsys, "simulate", "--code", fig3_dir / "code.json", "--fail", 4,
                     "--schemes", fig3_dir / "scheme_0.json")
    assert rc == EXIT_PARAM and "no-scheme-for-node: 4" in err


def test_console_script_module(fig3_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "piggyrepair.cli", "verify", "--code", str(fig3_dir / "code.json"),
         "--scheme", str(fig3_dir / "scheme_2.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "bandwidth=4" in proc.stdout
