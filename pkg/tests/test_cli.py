import io
import json
import shlex
from pathlib import Path

import pytest

from qmforms.cli import load_config, parse_angle, parse_complex, run, settings, build_parser

GOLDEN = Path(__file__).parent / "golden"


def corpus():
    for line in (GOLDEN / "corpus.txt").read_text().splitlines():
        if line.strip() and not line.startswith("#"):
            name, args = (x.strip() for x in line.split("|", 1))
            yield name, args


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def render(argv):
    code, out, err = invoke(argv)
    return f"exit: {code}\n--- stdout\n{out}--- stderr\n{err}"


CASES = list(corpus())


def test_corpus_covers_every_subcommand():
    used = {shlex.split(a)[0] for _, a in CASES}
    assert used == {"qexp", "info", "decompose", "bracket", "lvalue", "table", "check"}
    kinds = {shlex.split(a)[1] for _, a in CASES if a.startswith("check")}
    assert kinds == {"fe", "shift", "t0", "residues", "hadamard", "rc"}
    assert len(CASES) >= 15


@pytest.mark.parametrize("name,args", CASES, ids=[c[0] for c in CASES])
def test_golden(name, args):
    expected = (GOLDEN / f"{name}.out").read_bytes()
    assert render(shlex.split(args)).encode() == expected


def test_exit_codes():
    assert invoke(["qexp", "1/Delta", "3"])[0] == 0
    assert invoke(["nonsense"])[0] == 1
    assert invoke(["qexp", "E4 +"])[0] == 1
    assert invoke(["lvalue", "1/Delta", "0", "--prec", "64"])[0] == 2
    assert invoke(["check", "rc", "1/Delta"])[0] == 1
    assert invoke(["lvalue", "Delta", "6", "--prec", "32"])[0] == 1


def test_failed_check_exits_three():
    code, out, _ = invoke(["check", "fe", "Delta", "--prec", "64", "--tol", "0"])
    assert code == 3
    assert out.startswith("FAIL fe")


def test_near_pole_json_carries_residue():
    code, out, _ = invoke(["lvalue", "1/Delta", "-12", "--prec", "64", "--json"])
    assert code == 2
    data = json.loads(out)
    assert data["pole"][0].startswith("-12") and data["residue"][0].startswith("24")


def test_nonpositive_integer_l_value():
    code, out, _ = invoke(["lvalue", "1/Delta", "-5", "--prec", "64", "--json"])
    assert code == 0
    assert json.loads(out)["l"] == ["0", "0"]


def test_parse_helpers():
    assert parse_complex("2i") == 2j
    assert parse_complex("1.5-2i") == complex(1.5, -2)
    assert parse_complex("23/2") == 11.5
    assert abs(parse_angle("5pi/4") - 3.9269908169872414) < 1e-15
    assert parse_angle("4.0") == 4.0


def test_config_precedence(tmp_path):
    cfg = tmp_path / "qm.conf"
    cfg.write_text("# defaults for a run\nprec = 128\nt0 = 1.2\n")
    assert load_config(str(cfg)) == {"prec": "128", "t0": "1.2"}
    args = build_parser().parse_args(["lvalue", "Delta", "6", "--config", str(cfg), "--t0", "1.1"])
    conf = settings(args)
    assert conf["prec"] == 128
    assert conf["t0"] == 1.1
    args = build_parser().parse_args(["lvalue", "Delta", "6"])
    assert settings(args)["prec"] == 256 and settings(args)["t0"] == 1.05


def test_config_changes_output(tmp_path):
    cfg = tmp_path / "qm.conf"
    cfg.write_text("t0 = 1.2\nprec = 128\n")
    code, out, _ = invoke(["lvalue", "Delta", "6", "--config", str(cfg)])
    assert code == 0 and "t0 = 1.2" in out
