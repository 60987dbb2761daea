"""Command line: verify, table, export-ball, config validation, determinism."""
import json

import pytest

from singer_lattices.cli import main, split_prime_power
from singer_lattices.errors import ConfigError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def claims_of(report, i=0):
    return {c["id"]: c for c in report["entries"][i]["claims"]}


@pytest.fixture(scope="module")
def verify32():
    import contextlib
    import io
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["verify", "--d", "3", "--q", "2", "--format", "json"])
    return code, buf.getvalue()


def test_verify_q2_passes(verify32):
    code, out = verify32
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and rep["first_failure"] is None
    c = claims_of(rep)
    assert c["lattices.covolumes"]["status"] == "pass"
    assert c["lattices.covolumes"]["detail"]["gamma0_prime"] == "3/7"
    assert c["lattices.covolumes"]["detail"]["gamma0"] == "1/7"
    assert all(x["status"] in ("pass", "skipped") for x in c.values())


def test_verify_report_structure(verify32):
    rep = json.loads(verify32[1])
    assert rep["schema_version"] == 1 and rep["command"] == "verify"
    assert rep["config"]["cases"] == [[2, 1, 3]]
    for c in rep["entries"][0]["claims"]:
        assert set(c) == {"id", "anchor", "status", "detail"}
        assert c["anchor"]


def test_verify_deterministic(verify32, capsys):
    _, out, _ = run(capsys, "verify", "--d", "3", "--q", "2", "--format", "json")
    assert out == verify32[1]


def test_verify_table_format(capsys):
    code, out, _ = run(capsys, "verify", "--d", "3", "--q", "2", "--no-certify")
    assert code == 0
    assert "case 1a" in out and out.rstrip().endswith("OK")


def test_verify_q4_case(capsys):
    code, out, _ = run(capsys, "verify", "--d", "3", "--q", "4", "--no-certify", "--format", "json")
    rep = json.loads(out)
    c = claims_of(rep)["h.psl-count-and-index"]
    assert c["detail"]["case"] == "2a" and c["status"] == "pass"
    assert code == 0


def test_size_cap(capsys):
    code, out, err = run(capsys, "verify", "--d", "3", "--q", "9999")
    assert code == 2 and "size cap" in err and out == ""


@pytest.mark.parametrize("argv", [
    ["verify", "--d", "3", "--q", "6"],
    ["verify", "--d", "3", "--p", "4"],
    ["verify", "--q", "2"],
    ["verify", "--d", "1", "--q", "2"],
    ["verify", "--d", "3", "--q", "2", "--precision", "2"],
    ["verify", "--grid", "nope"],
    ["table", "--d", "3", "--q", "2", "--format", "dot"],
])
def test_bad_config(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_split_prime_power():
    assert split_prime_power(8) == (2, 3)
    assert split_prime_power(5) == (5, 1)
    with pytest.raises(ConfigError):
        split_prime_power(12)


def test_table_rows(capsys):
    code, out, _ = run(capsys, "table", "--grid", "small", "--no-certify", "--format", "json")
    rows = {(r["d"], r["q"]): r for r in json.loads(out)["rows"]}
    r = rows[(3, 2)]
    assert (r["S"], r["H"], r["H_cap_PSL"], r["index"]) == (7, 21, 21, 1)
    assert (r["covolume_gamma0_prime"], r["covolume_gamma0"]) == ("3/7", "1/7")
    r = rows[(3, 3)]
    assert (r["S"], r["H"], r["H_cap_PSL"], r["index"]) == (13, 39, 13, 3)
    assert (r["covolume_gamma0_prime"], r["covolume_gamma0"]) == ("3/13", "1/13")
    assert code == 0


def test_table_row_d4(capsys):
    code, out, _ = run(capsys, "table", "--d", "4", "--q", "2", "--no-certify")
    assert code == 0
    last = out.strip().splitlines()[-1].split()
    assert last == ["4", "2", "1b", "15", "60", "15", "4", "—", "—"]


def test_table_measured_q2(capsys):
    code, out, _ = run(capsys, "table", "--d", "3", "--q", "2", "--format", "json")
    r = json.loads(out)["rows"][0]
    assert r["measured_gamma0_prime"] == "3/7" and r["measured_gamma0"] == "1/7"


def test_export_ball_sizes(capsys):
    _, out, _ = run(capsys, "export-ball", "--d", "3", "--q", "2", "--radius", "1", "--format", "json")
    b = json.loads(out)["ball"]
    assert len(b["vertices"]) == 15
    _, out, _ = run(capsys, "export-ball", "--d", "3", "--q", "2", "--radius", "0", "--format", "json")
    assert len(json.loads(out)["ball"]["vertices"]) == 1


def test_export_ball_dot(capsys, tmp_path):
    path = tmp_path / "b.dot"
    code, out, _ = run(capsys, "export-ball", "--d", "3", "--q", "2", "--radius", "1",
                       "--format", "dot", "--out", str(path))
    text = path.read_text()
    assert code == 0 and out == ""
    assert text.startswith("graph ball {") and text.count(" -- ") > 0
    assert text.count("[label=") == 15


def test_export_ball_orbits_constant_per_type(capsys):
    _, out, _ = run(capsys, "export-ball", "--d", "3", "--q", "2", "--radius", "2", "--orbits",
                    "--format", "json")
    b = json.loads(out)["ball"]
    by_type = {}
    for v in b["vertices"]:
        by_type.setdefault(v["type"], set()).add(v["orbit"])
    assert all(len(s) == 1 for s in by_type.values())
    assert len({next(iter(s)) for s in by_type.values()}) == 3
