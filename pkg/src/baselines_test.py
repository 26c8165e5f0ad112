"""
기준 로드맵 테스트
"""

import os
import sys
from itertools import combinations

import networkx as nx
import pytest

# 프로젝트 루트 경로를 Python 경로에 추가
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from conftest import make_environment, uniform_demand
from src.baselines import (
    BaselineConfig,
    delaunay_edges,
    generate_baseline,
    generate_baseline_nodes,
    random_baseline_runs,
)
from src.discretize import NodeSet
from src.geometry import Point, Polygon, clearance_many, segment_in_free_space
from src.model import Environment, NodeKind, Robot


def node_set(points):
    ns = NodeSet(1.4)
    for p in points:
        ns.add(Point(*p), NodeKind.GRID)
    return ns


@pytest.fixture
def empty_env(robot):
    boundary = Polygon.from_coords([[0, 0], [10, 0], [10, 10], [0, 10]])
    return Environment(boundary, (), (), robot)


def test_config_spacing(abstract_map):
    env, _ = abstract_map
    assert BaselineConfig.for_environment(env, "grid4").spacing == pytest.approx(1.4)
    assert BaselineConfig.for_environment(env, "grid8").spacing == pytest.approx(1.53)
    assert BaselineConfig.for_environment(env, "random", seed=4).seed == 4
    with pytest.raises(ValueError):
        BaselineConfig("hexagon", 1.4)
    with pytest.raises(ValueError):
        BaselineConfig("grid4", 0.0)


def test_grid4_lattice_fills_empty_environment(empty_env):
    ns = generate_baseline_nodes(empty_env, BaselineConfig.for_environment(empty_env, "grid4"))
    # 0.7 ~ 9.1 구간에 1.4 간격으로 7 x 7
    assert len(ns) == 49
    assert ns.points[0] == Point(0.7, 0.7)


def test_lattice_respects_stations_and_clearance(abstract_map):
    env, _ = abstract_map
    for method in ("grid4", "grid8"):
        ns = generate_baseline_nodes(env, BaselineConfig.for_environment(env, method))
        assert ns.station_ids == [0, 1, 2, 3]
        assert clearance_many(ns.coords(), env.free_space).min() >= 0.7 - 1e-9
        for a, b in combinations(ns.points, 2):
            assert a.distance_to(b) >= 1.4 - 1e-9


def test_delaunay_square_and_triangle(robot):
    env = make_environment(10, 10, robot=robot)
    square = delaunay_edges(node_set([(2, 2), (4, 2), (4, 4), (2, 4)]), env)
    assert square.edge_count == 5
    assert delaunay_edges(node_set([(2, 2), (4, 2), (3, 5)]), env).edges() == [(0, 1), (0, 2), (1, 2)]


def test_delaunay_collinear_fallback(robot):
    env = make_environment(10, 10, robot=robot)
    rm = delaunay_edges(node_set([(6, 5), (2, 5), (4, 5)]), env)
    assert rm.edges() == [(0, 2), (1, 2)]


def test_delaunay_drops_edges_through_obstacles(robot):
    env = make_environment(10, 10, obstacles=[(4, 1, 6, 3)], robot=robot)
    rm = delaunay_edges(node_set([(2, 2), (8, 2), (5, 8)]), env)
    assert rm.edges() == [(0, 2), (1, 2)]
    for a, b in rm.edges():
        assert segment_in_free_space(rm.segment(a, b), env.free_space)


def test_random_nodes_are_deterministic(abstract_map):
    env, _ = abstract_map
    cfg = BaselineConfig.for_environment(env, "random", seed=3, max_rejections=200)
    first = generate_baseline_nodes(env, cfg)
    assert first.points == generate_baseline_nodes(env, cfg).points
    other = generate_baseline_nodes(env, BaselineConfig.for_environment(env, "random", seed=4, max_rejections=200))
    assert other.points != first.points
    assert clearance_many(first.coords(), env.free_space).min() >= 0.7 - 1e-9


def test_baseline_connects_demand(abstract_map):
    env, demand = abstract_map
    rm = generate_baseline(env, demand, BaselineConfig.for_environment(env, "grid4"))
    stations = rm.locate_interaction_points(env)
    assert stations == [0, 1, 2, 3]
    for s, t in combinations(stations, 2):
        assert nx.has_path(rm.graph, s, t)
    assert all(rm.usage(a, b) > 0 for a, b in rm.edges())


def test_baseline_zero_demand_keeps_stations(abstract_map):
    env, _ = abstract_map
    rm = generate_baseline(env, uniform_demand(env, 0), BaselineConfig.for_environment(env, "grid8"))
    assert rm.node_count == 4
    assert rm.edge_count == 0


def test_random_runs_are_stable(env1_map):
    env, demand = env1_map
    summary = random_baseline_runs(env, demand, seeds=range(10))
    assert summary.seeds == list(range(10))
    assert len(summary.reports) == 10
    assert summary.node_count_cv <= 0.10
    assert summary.mean.n_nodes == pytest.approx(sum(r.n_nodes for r in summary.reports) / 10)


def test_random_runs_need_seeds(abstract_map):
    env, demand = abstract_map
    with pytest.raises(ValueError):
        random_baseline_runs(env, demand, seeds=[])


def test_robot_changes_spacing():
    env = make_environment(10, 10, robot=Robot(0.3, 0.3, 0.1))
    assert BaselineConfig.for_environment(env, "grid4").spacing == pytest.approx(0.8)
