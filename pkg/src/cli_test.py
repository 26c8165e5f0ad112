"""
명령줄 인터페이스 테스트
하위 명령의 출력 파일, 결정성, 종료 코드를 확인합니다.
"""

import json
import os
import sys

import pytest

# 프로젝트 루트 경로를 Python 경로에 추가
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from conftest import MAPS_DIR
from src.cli import EXIT_DISCONNECTED, EXIT_INPUT, EXIT_OK, main
from src.generator import STAGES
from src.map_loader import load_roadmap

ENV = os.path.join(MAPS_DIR, "abstract_env.json")
DEMAND = os.path.join(MAPS_DIR, "abstract_env_demand.json")


@pytest.fixture(scope="module")
def generated(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("generate")
    out = out_dir / "roadmap.json"
    svg = out_dir / "roadmap.svg"
    code = main(["generate", "--env", ENV, "--demand", DEMAND, "--out", str(out), "--svg", str(svg),
                 "--stage", "all"])
    assert code == EXIT_OK
    return out_dir


def test_generate_all_stages(generated):
    assert (generated / "roadmap.json").exists()
    for stage in STAGES:
        assert (generated / f"roadmap_{stage}.json").exists()
        assert (generated / f"roadmap_{stage}.svg").exists()
    optimized_svg = (generated / "roadmap_optimized.svg").read_text(encoding="utf-8")
    full_svg = (generated / "roadmap_full.svg").read_text(encoding="utf-8")
    assert 'id="smoothed"' in optimized_svg
    assert 'id="smoothed"' not in full_svg
    assert load_roadmap(str(generated / "roadmap.json")) == load_roadmap(str(generated / "roadmap_optimized.json"))


def test_generate_is_deterministic(generated, tmp_path):
    out = tmp_path / "again.json"
    assert main(["generate", "--env", ENV, "--demand", DEMAND, "--out", str(out)]) == EXIT_OK
    assert out.read_bytes() == (generated / "roadmap.json").read_bytes()


def test_baseline_is_deterministic(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        code = main(["baseline", "--env", ENV, "--demand", DEMAND, "--method", "random", "--seed", "7",
                     "--out", str(path)])
        assert code == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_eval_compare_table_and_json(generated, tmp_path, capsys):
    grid = tmp_path / "grid4.json"
    assert main(["baseline", "--env", ENV, "--demand", DEMAND, "--method", "grid4", "--out", str(grid)]) == EXIT_OK
    own = str(generated / "roadmap.json")
    capsys.readouterr()

    assert main(["eval", "--env", ENV, "--demand", DEMAND, "--roadmap", own, str(grid), "--compare"]) == EXIT_OK
    table = capsys.readouterr().out
    assert "number of nodes" in table and "*" in table
    assert "roadmap" in table.splitlines()[0] and "grid4" in table.splitlines()[0]

    assert main(["eval", "--env", ENV, "--demand", DEMAND, "--roadmap", own, "--format", "json"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["n_nodes"] == load_roadmap(own).node_count



def test_eval_appends_random_mean_column(generated, capsys):
    own = str(generated / "roadmap.json")
    capsys.readouterr()
    code = main(["eval", "--env", ENV, "--demand", DEMAND, "--roadmap", own, "--random-mean", "--random-runs", "3",
                 "--compare", "--format", "json"])
    assert code == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert list(document["reports"]) == ["roadmap", "random_mean3"]
    assert document["reports"]["random_mean3"]["n_nodes"] > 0


def test_eval_rejects_zero_random_runs(generated):
    code = main(["eval", "--env", ENV, "--demand", DEMAND, "--roadmap", str(generated / "roadmap.json"),
                 "--random-mean", "--random-runs", "0"])
    assert code == EXIT_INPUT


def test_render_with_smoothing(generated, tmp_path):
    paths = [tmp_path / "a.svg", tmp_path / "b.svg"]
    for path in paths:
        code = main(["render", "--env", ENV, "--roadmap", str(generated / "roadmap.json"), "--smooth",
                     "--out", str(path)])
        assert code == EXIT_OK
    svg = paths[0].read_text(encoding="utf-8")
    assert 'id="smoothed"' in svg
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_render_rejects_too_large_deviation(generated, tmp_path):
    code = main(["render", "--env", ENV, "--roadmap", str(generated / "roadmap.json"), "--smooth",
                 "--d-ad", "0.5", "--out", str(tmp_path / "a.svg")])
    assert code == EXIT_INPUT


def test_missing_demand_file(tmp_path):
    code = main(["generate", "--env", ENV, "--demand", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "out.json")])
    assert code == EXIT_INPUT


def test_invalid_penalty_base(tmp_path):
    code = main(["generate", "--env", ENV, "--demand", DEMAND, "--penalty-base", "0.5",
                 "--out", str(tmp_path / "out.json")])
    assert code == EXIT_INPUT


def test_disconnected_demand(tmp_path):
    # 좁은 틈 두 개(0.5 m)만 남긴 벽이 두 방을 나눔
    env = {
        "boundary": [[0, 0], [10, 0], [10, 4], [0, 4]],
        "obstacles": [[[4.5, 0.5], [5.5, 0.5], [5.5, 3.5], [4.5, 3.5]]],
        "stations": [
            {"id": "L", "interaction_points": [[2, 2]]},
            {"id": "R", "interaction_points": [[8, 2]]},
        ],
        "robot": {"r_rob": 0.5, "w_rob": 0.35, "d_s": 0.2},
    }
    demand = {"order": ["L", "R"], "T": [[0, 1], [0, 0]]}
    env_path, demand_path = tmp_path / "env.json", tmp_path / "demand.json"
    env_path.write_text(json.dumps(env), encoding="utf-8")
    demand_path.write_text(json.dumps(demand), encoding="utf-8")
    out = tmp_path / "out.json"
    code = main(["generate", "--env", str(env_path), "--demand", str(demand_path), "--out", str(out)])
    assert code == EXIT_DISCONNECTED
    assert not out.exists()
