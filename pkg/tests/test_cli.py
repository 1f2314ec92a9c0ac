import json
import subprocess
import sys

import pytest

from kontsevich_bkp.algebra import strict_partitions
from kontsevich_bkp.cli import CHECKS, ConfigError, load_campaign, main, run_campaign

SMALL = {
    "seed": 5,
    "checks": [
        {"name": "cauchy", "cutoff": 4},
        {"name": "moments-table", "lambdas": ["1", "2"]},
        {"name": "hirota-eqs", "lambdas": ["1", "3/2"], "cutoff": 8},
        {"name": "bkp-residue", "lambdas": ["1", "2"], "cutoff": 4},
        {"name": "schur-pfaffian", "sizes": [2, 4], "draws": 5},
        {"name": "mc-cross", "lambdas": ["1", "2"], "v0": {"4": "-1/4"}, "samples": 20000},
    ],
}


def _write(tmp_path, data, name="campaign.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def _strip_times(report):
    for c in report["checks"]:
        c.pop("wall_time")
    return report


def test_registry_covers_default_campaign():
    camp = load_campaign("scripts/default_campaign.json")
    assert {c["name"] for c in camp["checks"]} <= set(CHECKS)


def test_verify_passes_and_writes_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["verify", _write(tmp_path, SMALL), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert set(report) >= {"artifact", "version", "convention", "seed", "summary", "checks"}
    assert report["summary"]["pass"] == len(SMALL["checks"])
    for c in report["checks"]:
        assert set(c) >= {"name", "status", "measure", "params", "detail", "wall_time"}
        assert c["status"] == "pass"
    assert "pass" in capsys.readouterr().out


def test_report_independent_of_jobs(tmp_path):
    camp = load_campaign(_write(tmp_path, SMALL))
    a = _strip_times(run_campaign(camp, jobs=1))
    b = _strip_times(run_campaign(camp, jobs=3))
    assert a == b


def test_float_spectrum_rejected_by_exact_check(tmp_path):
    # numeric checks accept floats; exact ones report an error for that check only
    data = {"checks": [{"name": "moments-table", "lambdas": [1.5, 2]}, {"name": "hook", "max_weight": 4}]}
    out = tmp_path / "r.json"
    assert main(["verify", _write(tmp_path, data), "--out", str(out)]) == 1
    checks = json.loads(out.read_text())["checks"]
    assert [c["status"] for c in checks] == ["error", "pass"]


def test_seed_override(tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    cfg = _write(tmp_path, {"seed": 1, "checks": [SMALL["checks"][-1]]})
    main(["verify", cfg, "--out", str(out1), "--seed", "2"])
    main(["verify", cfg, "--out", str(out2), "--seed", "3"])
    r1, r2 = json.loads(out1.read_text()), json.loads(out2.read_text())
    assert r1["seed"] == 2 and r2["seed"] == 3
    assert r1["checks"][0]["measure"] != r2["checks"][0]["measure"]


def test_coincident_spectrum_fails_only_that_check(tmp_path):
    data = {"seed": 1, "checks": [{"name": "cauchy", "cutoff": 4}, {"name": "theorem1", "lambdas": ["2", "2"]}]}
    out = tmp_path / "r.json"
    assert main(["verify", _write(tmp_path, data), "--out", str(out)]) == 1
    checks = json.loads(out.read_text())["checks"]
    assert checks[0]["status"] == "pass"
    assert checks[1]["status"] == "error"
    assert "coincident spectrum" in checks[1]["error"]


@pytest.mark.parametrize(
    "data",
    [
        {"checks": [{"name": "no-such-check"}]},
        {"checks": [{"name": "cauchy", "bogus": 1}]},
        {"checks": [{"name": "theorem1"}]},
        "{not json",
    ],
)
def test_config_errors(tmp_path, data):
    assert main(["verify", _write(tmp_path, data)]) == 2


def test_load_campaign_raises(tmp_path):
    with pytest.raises(ConfigError):
        load_campaign(_write(tmp_path, {"checks": [{"name": "nope"}]}))


def test_empty_campaign(tmp_path):
    assert main(["verify", _write(tmp_path, {"checks": []})]) == 0


def test_cache_warm_stat_clear(tmp_path, capsys):
    d = str(tmp_path / "cache")
    assert main(["cache", "clear", "--dir", d]) == 0
    assert json.loads(capsys.readouterr().out)["removed"] == 0
    assert main(["cache", "warm", "--dir", d]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["entries"] == len(strict_partitions(8))
    main(["cache", "stat", "--dir", d])
    assert json.loads(capsys.readouterr().out)["entries"] == info["entries"]
    main(["cache", "clear", "--dir", d])
    assert json.loads(capsys.readouterr().out)["removed"] == info["entries"]


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "kontsevich_bkp.cli", "verify", _write(tmp_path, {"checks": [{"name": "hook", "max_weight": 4}]})],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
