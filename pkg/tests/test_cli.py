import io
import subprocess
import sys

import pytest

from fogmtd import cli, core
from fogmtd.scenario_io import fixture_text


def invoke(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def fig12(tmp_path):
    path = tmp_path / "fig12.scn"
    path.write_text(fixture_text("eval-fig12"))
    return str(path)


def test_run_fig12(fig12, capsys):
    code, text = invoke("run", fig12)
    assert code == 0
    assert len(text.splitlines()) == 12  # format line, header, 10 rows
    assert "seconds=10" in capsys.readouterr().err
    _, text = invoke("run", fig12)
    assert "blacklist=1" in capsys.readouterr().err


def test_run_out_file(fig12, tmp_path):
    out = tmp_path / "m.csv"
    code, text = invoke("run", fig12, "--format", "events", "--out", str(out))
    assert code == 0 and text == ""
    assert out.read_text().splitlines()[1] == "second,kind,uid,fid,amount"


def test_run_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text(fixture_text("case-a").replace("req_size = 10", "req_size = ten"))
    code, _ = invoke("run", str(bad))
    assert code == 1
    assert f"{bad}:6" in capsys.readouterr().err


def test_run_missing_file(tmp_path):
    assert invoke("run", str(tmp_path / "nope.scn"))[0] == 1


def test_seed_override(tmp_path):
    path = tmp_path / "w.scn"
    path.write_text(fixture_text("eval-fig12").replace("demand = 100", "demand = 1..100\nshuffle = yes"))
    _, a = invoke("run", str(path), "--format", "events")
    _, b = invoke("run", str(path), "--format", "events", "--seed", "5")
    assert a != b
    assert a.splitlines()[:2] == b.splitlines()[:2]


def test_validate(fig12, tmp_path):
    assert invoke("validate", fig12) == (0, "ok: 10 seconds, 100 demands\n")
    bad = tmp_path / "bad.scn"
    bad.write_text(fixture_text("case-a").replace("5000", "5001"))
    assert invoke("validate", str(bad))[0] == 1


@pytest.mark.parametrize("name,needle", [
    ("case-a", "F1.sum   0/0 ok | 50/50 ok | 140/140 ok | 180/180 ok | 230/230 ok | 260/260 ok | 360/360 ok"),
    ("case-b", "F1.free  1/1 ok | 0/0 ok"),
    ("case-c", "F3.sum   0/0 ok | 50/50 ok"),
    ("case-d", "cloud: 60"),
    ("case-2", "F2.mode  0/0 ok | 1/1 ok | 0/0 ok"),
])
def test_case(name, needle):
    code, text = invoke("case", name)
    assert code == 0, text
    assert needle in text
    assert text.endswith("match\n")


def test_case_2_blacklist():
    assert "blacklist: {U2, U5}" in invoke("case", "case-2")[1]


def test_case_unknown():
    assert invoke("case", "case-e")[0] == 1


def test_case_mismatch_detected(monkeypatch):
    monkeypatch.setitem(cli.scenario_io.PAPER_TABLES, "case-a", {"F1.sum": [0, 51]})
    code, text = invoke("case", "case-a")
    assert code == 1 and "MISMATCH" in text


def test_oracle_check_fixtures(tmp_path):
    for name in ("case-a", "case-b", "case-c", "case-d", "case-2", "eval-fig12"):
        path = tmp_path / f"{name}.scn"
        path.write_text(fixture_text(name))
        assert invoke("oracle-check", str(path))[0] == 0


def test_oracle_check_random():
    code, text = invoke("oracle-check", "--random", "100", "--seed", "7")
    assert code == 0 and text == "match: 100 scenario(s)\n"


def test_oracle_check_catches_mutant(monkeypatch):
    """A corrupted serve that leaks one request per overflow must be caught."""
    original = core.serve

    def leaky_serve(state, fid, uid, need):
        out = original(state, fid, uid, need)
        if isinstance(out, core.Overflow):
            state.cloud_served += 1
        return out

    monkeypatch.setattr(core, "serve", leaky_serve)
    code, text = invoke("oracle-check", "--random", "100", "--seed", "7")
    assert code == 2
    assert "DIVERGENCE" in text and "second" in text


def test_oracle_check_catches_policy_mutant(monkeypatch):
    def highest(state, exclude=None):
        for fid in reversed(list(state.fogs)):
            fog = state.fogs[fid]
            if fid != exclude and fog.flag.mode == 1 and fog.flag.free == 1:
                return fid
        return None

    monkeypatch.setattr(core, "lowest_free_fog", highest)
    code, text = invoke("oracle-check", "--random", "50", "--seed", "1")
    assert code == 2
    assert "demand #" in text


def test_output_byte_identical(fig12):
    assert invoke("run", fig12, "--format", "events") == invoke("run", fig12, "--format", "events")


def test_module_entry_point(fig12):
    proc = subprocess.run([sys.executable, "-m", "fogmtd", "run", fig12], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("format=1\n")
    proc = subprocess.run([sys.executable, "-m", "fogmtd"], capture_output=True, text=True)
    assert proc.returncode == 2  # argparse usage error
