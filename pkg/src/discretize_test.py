"""
자유 공간 이산화 테스트
"""

import math
import os
import sys
from itertools import combinations

import numpy as np
import pytest

# 프로젝트 루트 경로를 Python 경로에 추가
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from conftest import make_environment, uniform_demand
from src.discretize import (
    GridConfig,
    NodeSet,
    SpatialHash,
    default_grid_resolution,
    discretize,
    local_grid_points,
    place_corner_nodes,
    place_station_nodes,
    rank_corner_candidates,
    round_up_cm,
)
from src.geometry import Point, clearance_many, convex_corner_candidates
from src.model import NodeKind, RoadmapInputError


def test_round_up_cm():
    assert round_up_cm(1.4) == pytest.approx(1.4)
    assert round_up_cm(math.sqrt(2) * 1.075) == pytest.approx(1.53)
    assert round_up_cm(1.521) == pytest.approx(1.53)


def test_default_grid_config(abstract_map):
    env, _ = abstract_map
    assert default_grid_resolution(env) == pytest.approx(1.53)
    cfg = GridConfig.for_environment(env)
    assert cfg.d_g == pytest.approx(1.53)
    assert cfg.max_size == math.ceil(16 / 1.53)


def test_grid_config_rejects_small_resolution(abstract_map):
    env, _ = abstract_map
    with pytest.raises(ValueError):
        GridConfig.for_environment(env, d_g=1.45)
    with pytest.raises(ValueError):
        GridConfig(1.53, 0)


def test_spatial_hash():
    index = SpatialHash(1.4)
    index.insert(0, Point(0, 0))
    index.insert(1, Point(5, 5))
    assert index.any_within(Point(1.0, 0.5), 1.4)
    assert not index.any_within(Point(1.4, 0.0), 1.4)
    assert not index.any_within(Point(3, 3), 1.4)


def test_local_grid_ring():
    ring = local_grid_points(Point(0, 0), 1, 2.0)
    assert len(ring) == 8
    assert ring[0] == Point(-2.0, -2.0)
    assert ring[-1] == Point(2.0, 2.0)
    assert len(local_grid_points(Point(0, 0), 3, 1.0)) == 24
    with pytest.raises(ValueError):
        local_grid_points(Point(0, 0), 0, 1.0)


def test_station_nodes_too_close(robot):
    env = make_environment(10, 10, points=[(2, 2), (3, 2.5), (8, 8)], robot=robot)
    with pytest.raises(RoadmapInputError) as info:
        place_station_nodes(env)
    assert "1" in str(info.value) and "2" in str(info.value)


def test_station_nodes_come_first(abstract_map):
    env, _ = abstract_map
    ns = place_station_nodes(env)
    assert ns.station_ids == [0, 1, 2, 3]
    assert ns.points == list(env.interaction_points)


def test_corner_ranking_scores_shortest_path_corners(robot):
    # 두 지점 사이 최단 경로는 장애물 한쪽의 코너 두 개를 지남
    env = make_environment(16, 12, obstacles=[(6, 4, 10, 8)], points=[(2, 6), (14, 6)], robot=robot)
    ranking = rank_corner_candidates(env, uniform_demand(env))
    scores = [score for _, score in ranking]
    assert scores == sorted(scores, reverse=True)
    assert sum(scores) == pytest.approx(2.0)
    assert sorted(index for index, _ in ranking) == list(range(4))


def test_corner_ranking_ties_by_candidate_order(abstract_map):
    env, demand = abstract_map
    ranking = rank_corner_candidates(env, demand)
    for (i, si), (j, sj) in zip(ranking, ranking[1:]):
        assert si > sj or (si == sj and i < j)


def test_conflicting_corners_are_excluded(robot):
    # 간격 1.5 m 인 두 장애물: 마주 보는 코너 후보 간 거리가 d_v_min보다 작음
    env = make_environment(12, 10, obstacles=[(3, 3, 5, 7), (6.5, 3, 8.5, 7)], points=[(1.5, 5), (10.5, 5)],
                           robot=robot)
    ns = place_station_nodes(env)
    place_corner_nodes(ns, env, uniform_demand(env))
    candidates = convex_corner_candidates(env.free_space)
    assert len(ns.corner_ids) + len(ns.excluded_corners) == len(candidates)
    assert ns.excluded_corners
    for a, b in combinations(ns.points, 2):
        assert a.distance_to(b) >= 1.4 - 1e-9


def test_discretize_invariants(abstract_map):
    env, demand = abstract_map
    ns = discretize(env, demand, GridConfig.for_environment(env))
    coords = ns.coords()
    assert len(ns) > 20
    assert ns.kinds[:4] == [NodeKind.STATION] * 4
    assert ns.kinds[4:8] == [NodeKind.CORNER] * 4
    assert set(ns.kinds[8:]) == {NodeKind.GRID}
    diff = coords[:, None, :] - coords[None, :, :]
    distances = np.hypot(diff[..., 0], diff[..., 1]) + np.eye(len(coords)) * 1e9
    assert distances.min() >= 1.4 - 1e-9
    assert clearance_many(coords, env.free_space).min() >= 0.7 - 1e-9


def test_discretize_is_deterministic(abstract_map):
    env, demand = abstract_map
    cfg = GridConfig.for_environment(env)
    assert discretize(env, demand, cfg).points == discretize(env, demand, cfg).points


def test_node_set_to_roadmap():
    ns = NodeSet(1.4)
    ns.add(Point(0, 0), NodeKind.STATION)
    ns.add(Point(2, 0), NodeKind.GRID)
    assert not ns.is_clear(Point(1, 0))
    assert ns.is_clear(Point(3.5, 0))
    rm = ns.to_roadmap()
    assert rm.nodes() == [0, 1]
    assert rm.edge_count == 0
    assert ns.seeds() == [0]
