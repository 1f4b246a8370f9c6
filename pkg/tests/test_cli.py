import csv
import hashlib
import io
import json

import pytest

from citemap.cli import main
from citemap.ingest import serialize_records
from citemap.pipeline import ARTIFACTS
from citemap.synth import PublisherSpec, SynthSpec, generate

PUBLISHERS = tuple(PublisherSpec(f"Press {i:02d}", 12 - i) for i in range(11)) + (
    PublisherSpec("Serial House", 3, p_zero=0.2, alpha=1.4, issn_only=True),)


@pytest.fixture
def corpus(tmp_path):
    spec = SynthSpec(seed=21, n_records=6000, p_zero=0.75, alpha=2.1, max_n=80,
                     publishers=PUBLISHERS, disciplines=(("SCI", 2), ("SOC", 1)), overlap=0.1)
    path = tmp_path / "records.csv"
    path.write_text(serialize_records(generate(spec)), encoding="utf-8")
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_pipeline_artifacts(corpus, tmp_path, capsys):
    out = tmp_path / "out"
    code, stdout, err = run(["pipeline", "--records", corpus, "--out", out], capsys)
    assert code == 0
    assert "Serial House" in err and "serial-identifiers" in err
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "complete"
    for d in ("SCI", "SOC"):
        assert sorted(p.name for p in (out / d).iterdir()) == sorted(ARTIFACTS)
    assert len(manifest["outputs"]) == 2 * len(ARTIFACTS)
    for entry in manifest["outputs"]:
        data = (out / entry["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]


def test_fewer_publishers_than_k(corpus, tmp_path, capsys):
    out = tmp_path / "out"
    assert run(["pipeline", "--records", corpus, "--out", out, "-k", 20,
                "--discipline", "SCI"], capsys)[0] == 0
    ranking = list(csv.DictReader(io.StringIO((out / "SCI" / "gain_ranking.csv").read_text())))
    layout = json.loads((out / "SCI" / "layout.json").read_text())
    assert len(ranking) == 12
    assert len(layout["dots"]) == 12
    assert [int(r["rank"]) for r in ranking] == list(range(1, 13))


def test_excluded_publisher(corpus, tmp_path, capsys):
    out = tmp_path / "out"
    code, _, _ = run(["pipeline", "--records", corpus, "--out", out,
                      "--exclude", "Serial House", "--discipline", "SCI"], capsys)
    assert code == 0
    layout = json.loads((out / "SCI" / "layout.json").read_text())
    assert "Serial House" not in [d["label"] for d in layout["dots"]]
    assert len(layout["dots"]) == 11
    ranking = {r["label"]: r for r in
               csv.DictReader(io.StringIO((out / "SCI" / "gain_ranking.csv").read_text()))}
    assert ranking["Serial House"]["excluded"] == "1"
    assert ranking["Press 00"]["excluded"] == "0"
    svg = (out / "SCI" / "map.svg").read_text()
    assert svg.count('class="dot"') == 11


def test_manifest_deterministic(corpus, tmp_path, capsys):
    out = tmp_path / "out"
    digests = []
    for jobs in (1, 2):
        assert run(["pipeline", "--records", corpus, "--out", out, "--jobs", jobs], capsys)[0] == 0
        manifest = json.loads((out / "manifest.json").read_text())
        digests.append([e["sha256"] for e in manifest["outputs"]])
    assert digests[0] == digests[1]


def test_config_file_and_overrides(corpus, tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"records": [str(corpus)], "k": 5, "log_base": "2",
                               "output_dir": str(tmp_path / "a")}))
    assert run(["pipeline", "--config", cfg, "--discipline", "SOC"], capsys)[0] == 0
    layout = json.loads((tmp_path / "a" / "SOC" / "layout.json").read_text())
    assert len(layout["dots"]) == 5
    assert not (tmp_path / "a" / "SCI").exists()


def test_exit_codes(corpus, tmp_path, capsys):
    code, _, err = run(["pipeline", "--records", tmp_path / "nope.csv", "--out", tmp_path], capsys)
    assert code == 2 and "not found" in err
    bad_cfg = tmp_path / "bad.json"
    bad_cfg.write_text('{"records": [], "colour": "red"}')
    assert run(["pipeline", "--config", bad_cfg], capsys)[0] == 2
    assert run(["gain", "--records", corpus, "--discipline", "Physics"], capsys)[0] == 2
    # arts & humanities has no records here: a data error
    code, _, err = run(["indicators", "--records", corpus, "--discipline", "AH"], capsys)
    assert code == 1 and "ArtsHumanities" in err
    empty = tmp_path / "empty.csv"
    empty.write_text("record_id,publisher_raw,year,citations,categories\n")
    out = tmp_path / "failed"
    assert run(["pipeline", "--records", empty, "--out", out], capsys)[0] == 1
    assert json.loads((out / "manifest.json").read_text())["status"] == "failed"
    with pytest.raises(SystemExit) as exc:
        main(["lotka", "--method", "guess"])
    assert exc.value.code == 2


def test_ingest_check(tmp_path, capsys):
    path = tmp_path / "r.csv"
    path.write_text("record_id,publisher_raw,year,citations,categories\n"
                    "1,Brill,2006,3,SCI\n2,Brill,2006,-4,SCI\n3,Brill,2007,0,Unknown Field\n")
    code, out, _ = run(["ingest-check", "--records", path], capsys)
    assert code == 0
    assert "r.csv:3: " in out and "line 0" not in out
    assert run(["ingest-check", "--records", path, "--strict"], capsys)[0] == 1


def test_analysis_subcommands(corpus, tmp_path, capsys):
    code, out, _ = run(["indicators", "--records", corpus], capsys)
    assert code == 0 and out.startswith("INDICATORS,ALL,")
    code, out, _ = run(["indicators", "--records", corpus, "--format", "json",
                        "--discipline", "SCI"], capsys)
    assert json.loads(out)["Science"]["nr_bc"] > 0
    code, out, _ = run(["indicators", "--records", corpus, "--group-by", "year"], capsys)
    assert code == 0 and "2005" in out

    code, out, _ = run(["histogram", "--records", corpus, "--discipline", "SCI",
                        "--publisher", "Press 00"], capsys)
    assert code == 0 and out.startswith("l_lower,l_upper,count,probability\n0,1,")

    code, out, _ = run(["gain", "--records", corpus, "--discipline", "SCI", "-k", 3], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 4

    report = tmp_path / "report.csv"
    code, out, _ = run(["lotka", "--records", corpus, "--discipline", "SCI",
                        "--report", report], capsys)
    fit = json.loads(out)
    assert code == 0 and 1.5 < fit["alpha"] < 2.7
    assert report.read_text().startswith("n,observed,predicted,residual,used\n")

    layout, svg = tmp_path / "layout.json", tmp_path / "map.svg"
    code, _, _ = run(["map", "--records", corpus, "--discipline", "SOC", "--layout", layout,
                      "--svg", svg, "--radius-scale", "log"], capsys)
    assert code == 0
    assert json.loads(layout.read_text())["config"]["radius_scale"] == "log"
    assert svg.read_text().count('class="dot"') == 12


def test_synth_command(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"n_records": 20_000, "p_zero": 0.74, "seed": 1,
                                "publishers": [["A", 1], ["B", 2]]}))
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.jsonl"
    assert run(["synth", spec, "--out", a], capsys)[0] == 0
    assert run(["synth", spec, "--out", b], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(["synth", spec, "--seed", 2, "--out", c], capsys)[0] == 0
    assert c.read_text().startswith("{")
    code, out, _ = run(["indicators", "--records", a, "--format", "json"], capsys)
    assert abs(json.loads(out)["ALL"]["pct_non_cited"] - 74) <= 1
    assert run(["synth", tmp_path / "missing.json"], capsys)[0] == 2
