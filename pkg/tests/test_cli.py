import csv
import json

import numpy as np
import pytest

from ilssumm.cli import main
from ilssumm.features import FrameImage, write_ppm
from ilssumm.instance import save_instance
from ilssumm.synthetic import random_instance


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("method", ["ils", "local", "restart", "exact"])
def test_solve_instance_a(instance_a_file, capsys, method):
    code, out, _ = run(["solve", "--instance", instance_a_file, "--method", method, "--optimality"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["total_distance"] == 2.0
    assert len(report["selected"]) == 2
    assert report["optimality_percent"] == 100.0
    assert report["metric"] == "euclidean"
    assert report["duration_used_s"] <= report["budget_s"]


def test_solve_counters(instance_a_file, capsys):
    report = json.loads(run(["solve", "--instance", instance_a_file], capsys)[1])
    assert report["counters"]["perturbations"] == 5
    assert report["counters"]["local_search_steps"] == 1
    assert report["runtime_pct_of_video"] is None


def test_runtime_percent_with_video_duration(instance_a_file, capsys):
    argv = ["solve", "--instance", instance_a_file, "--video-duration-seconds", 100, "--budget-seconds", 5]
    report = json.loads(run(argv, capsys)[1])
    assert report["runtime_pct_of_video"] == pytest.approx(report["wall_time_ms"] / 1000.0, rel=1e-9)


def test_missing_instance(tmp_path, capsys):
    code, _, err = run(["solve", "--instance", tmp_path / "missing.x", "--method", "ils"], capsys)
    assert code == 3
    assert "error" in err


def test_corrupt_instance(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{oops")
    assert run(["solve", "--instance", path], capsys)[0] == 3


def test_infeasible_exit_code(instance_a_file, capsys):
    assert run(["solve", "--instance", instance_a_file, "--budget-seconds", 1], capsys)[0] == 4


def test_usage_errors(instance_a_file, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--instance", str(instance_a_file), "--method", "greedy"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--instance", str(instance_a_file), "--budget-seconds", "-1"])
    assert exc.value.code == 2
    code, _, _ = run(["solve", "--instance", instance_a_file, "--budget-ratio", 1.5], capsys)
    assert code == 2


def test_budget_ratio_and_cap(instance_a_file, capsys):
    # total duration 10 s: ratio 0.5 gives 5 s, a 4 s cap wins over it
    report = json.loads(run(["solve", "--instance", instance_a_file, "--budget-ratio", 0.5], capsys)[1])
    assert report["budget_s"] == 5.0
    argv = ["solve", "--instance", instance_a_file, "--budget-ratio", 0.5, "--budget-cap-seconds", 4]
    report = json.loads(run(argv, capsys)[1])
    assert report["budget_s"] == 4.0
    assert report["duration_used_s"] <= 4.0


def test_csv_instance_with_ratio(tmp_path, capsys):
    path = tmp_path / "clip.csv"
    path.write_text("a,2,0\nb,3,1\nc,2,4\nd,3,5\n")
    report = json.loads(run(["solve", "--instance", path, "--budget-ratio", 0.5], capsys)[1])
    assert report["instance"] == "clip"
    assert report["total_distance"] == 2.0


def test_exact_command(instance_a_file, capsys):
    report = json.loads(run(["exact", "--instance", instance_a_file], capsys)[1])
    assert report["total_distance"] == 2.0
    assert report["proved_optimal"] is True


def test_exact_full_set(tmp_path, capsys):
    inst = random_instance(np.random.default_rng(0), 5, 3, budget_fraction=1.0)
    save_instance(inst, tmp_path / "full.json")
    report = json.loads(run(["exact", "--instance", tmp_path / "full.json"], capsys)[1])
    assert report["total_distance"] == 0.0


def test_exact_cap_refusal(tmp_path, capsys):
    inst = random_instance(np.random.default_rng(0), 30, 3)
    save_instance(inst, tmp_path / "big.json")
    code, _, err = run(["exact", "--instance", tmp_path / "big.json"], capsys)
    assert code == 5
    assert "cap" in err
    code, out, _ = run(["exact", "--instance", tmp_path / "big.json", "--force", "--max-nodes", 50], capsys)
    assert code == 0
    assert json.loads(out)["proved_optimal"] is False


def test_evaluate(instance_a_file, tmp_path, capsys):
    doc = json.loads(run(["evaluate", "--instance", instance_a_file, "--selected", "s0"], capsys)[1])
    assert doc["total_distance"] == 10.0
    assert doc["optimality_percent"] == 20.0
    report = tmp_path / "r.json"
    run(["solve", "--instance", instance_a_file, "--out", report], capsys)
    doc = json.loads(run(["evaluate", "--instance", instance_a_file, "--report", report], capsys)[1])
    assert doc["total_distance"] == 2.0 and doc["feasible"]
    doc = json.loads(run(["evaluate", "--instance", instance_a_file, "--selected", "s0,s1,s2"], capsys)[1])
    assert not doc["feasible"] and doc["optimality_percent"] is None
    assert run(["evaluate", "--instance", instance_a_file, "--selected", "zz"], capsys)[0] == 3


def bench_dir(tmp_path, corrupt=False):
    root = tmp_path / "bench"
    root.mkdir()
    rng = np.random.default_rng(7)
    for k in range(3):
        inst = random_instance(rng, 10 + k, 4, name=f"inst{k}")
        save_instance(inst, root / f"inst{k}.json")
    if corrupt:
        (root / "inst1.json").write_text("{broken")
    return root


def read_rows(text):
    return list(csv.DictReader(text.splitlines()))


def test_bench(tmp_path, capsys):
    root = bench_dir(tmp_path)
    code, out, _ = run(["bench", "--instances", root, "--methods", "ils,local,exact"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "instance,method,td,optimality_percent,wall_time_ms,runtime_pct_of_video"
    rows = read_rows(out)
    assert [r["instance"] for r in rows] == ["inst0"] * 3 + ["inst1"] * 3 + ["inst2"] * 3 + ["mean"] * 3
    mean = {r["method"]: float(r["optimality_percent"]) for r in rows if r["instance"] == "mean"}
    assert mean["exact"] == 100.0
    assert mean["ils"] >= mean["local"]
    for r in rows:
        assert r["runtime_pct_of_video"] == ""


def test_bench_corrupt_file(tmp_path, capsys, caplog):
    root = bench_dir(tmp_path, corrupt=True)
    code, out, _ = run(["bench", "--instances", root, "--methods", "ils,local"], capsys)
    assert code == 0
    rows = read_rows(out)
    errors = [r for r in rows if r["method"] == "error"]
    assert [r["instance"] for r in errors] == ["inst1"]
    assert {r["instance"] for r in rows if r["method"] == "ils"} == {"inst0", "inst2", "mean"}
    assert "inst1" in caplog.text


def test_bench_empty_dir(tmp_path, capsys, caplog):
    (tmp_path / "empty").mkdir()
    code, out, _ = run(["bench", "--instances", tmp_path / "empty"], capsys)
    assert code == 0
    assert out.strip() == "instance,method,td,optimality_percent,wall_time_ms,runtime_pct_of_video"
    assert "no instance" in caplog.text


def test_bench_runtime_vs_shot_total(tmp_path, capsys):
    root = bench_dir(tmp_path)
    out_path = tmp_path / "t.csv"
    run(["bench", "--instances", root, "--methods", "local", "--runtime-vs-shot-total", "--out", out_path], capsys)
    rows = read_rows(out_path.read_text())
    assert all(float(r["runtime_pct_of_video"]) > 0 for r in rows)


def test_bench_bad_methods(tmp_path, capsys):
    assert run(["bench", "--instances", bench_dir(tmp_path), "--methods", "ils,magic"], capsys)[0] == 2


def frames(tmp_path):
    rng = np.random.default_rng(1)
    lines = []
    for k, t in enumerate([2, 3, 2]):
        write_ppm(FrameImage.from_array(rng.integers(0, 256, (3, 3, 3), dtype=np.uint8)), tmp_path / f"f{k}.ppm")
        lines.append(f"f{k}.ppm,{t}")
    (tmp_path / "manifest.csv").write_text("\n".join(lines) + "\n")
    return tmp_path / "manifest.csv"


@pytest.mark.parametrize("bins, dim", [(32, 96), (16, 48)])
def test_features(tmp_path, capsys, bins, dim):
    manifest = frames(tmp_path)
    out = tmp_path / "inst.json"
    argv = ["features", "--frames", tmp_path, "--manifest", manifest, "--budget-seconds", 5,
            "--bins", bins, "--out", out]
    assert run(argv, capsys)[0] == 0
    doc = json.loads(out.read_text())
    assert len(doc["shots"]) == 3
    assert {len(s["features"]) for s in doc["shots"]} == {dim}
    assert doc["budget_seconds"] == 5.0
    code, rep, _ = run(["solve", "--instance", out, "--method", "exact"], capsys)
    assert code == 0 and json.loads(rep)["proved_optimal"]


def test_features_missing_manifest(tmp_path, capsys):
    argv = ["features", "--frames", tmp_path, "--manifest", tmp_path / "nope.csv", "--budget-seconds", 5]
    assert run(argv, capsys)[0] == 3
