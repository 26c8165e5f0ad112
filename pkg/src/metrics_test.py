"""
평가 지표 테스트
Kansky 지수, A* 확장 수, 최소 절단 연결도(전수 제거 탐색과 비교), 대수적 연결도(닫힌 형태와 비교),
정규화 최단 경로 길이, 보고서 비교와 출력 형식을 확인합니다.
"""

import json
import math
import os
import sys
from itertools import combinations

import networkx as nx
import numpy as np
import pytest

# 프로젝트 루트 경로를 Python 경로에 추가
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from conftest import make_environment, uniform_demand
from src.geometry import Point
from src.metrics import (
    DENSE_EIGEN_LIMIT,
    METRIC_LABELS,
    METRIC_NAMES,
    MetricsReport,
    algebraic_connectivity,
    astar_expansions,
    best_per_metric,
    compare_reports,
    count_expansions,
    euclidean_shortest_lengths,
    evaluate,
    format_json,
    format_table,
    kansky_from_counts,
    mean_connectivity,
    normalized_mean_spl,
    pair_connectivity,
)
from src.model import DisconnectedDemandError, NodeKind, Roadmap, TransportMatrix


def roadmap_from(points, edges, kinds=None):
    rm = Roadmap()
    for i, p in enumerate(points):
        rm.add_node(Point(*p), kinds[i] if kinds else NodeKind.GRID)
    for a, b in edges:
        rm.add_edge(a, b)
    return rm


def circle_points(n, radius=5.0):
    return [(radius * math.cos(2 * math.pi * i / n), radius * math.sin(2 * math.pi * i / n)) for i in range(n)]


@pytest.mark.parametrize(
    "counts, expected",
    [
        ((44, 64), (0.253, 1.454, 0.508)),
        ((94, 157), (0.350, 1.670, 0.569)),
        ((250, 351), (0.206, 1.404, 0.471)),
    ],
)
def test_kansky_reproduces_published_values(counts, expected):
    values = kansky_from_counts(*counts)
    for value, target in zip(values, expected):
        # 발표 값은 소수 셋째 자리까지 기록되어 있음
        assert value == pytest.approx(target, abs=1e-3)


def test_kansky_requires_three_nodes():
    with pytest.raises(ValueError):
        kansky_from_counts(2, 1)


def test_count_expansions_on_line():
    rm = roadmap_from([(0, 0), (1, 0), (2, 0), (3, 0)], [(0, 1), (1, 2), (2, 3)])
    count, length = count_expansions(rm, 0, 3)
    assert count == 4
    assert length == pytest.approx(3.0)


def test_count_expansions_disconnected():
    rm = roadmap_from([(0, 0), (1, 0)], [])
    with pytest.raises(DisconnectedDemandError):
        count_expansions(rm, 0, 1)


def test_astar_never_expands_more_than_dijkstra():
    rng = np.random.default_rng(7)
    for _ in range(30):
        points = rng.uniform(0, 20, size=(40, 2))
        graph = nx.random_geometric_graph(40, 0.3, pos={i: tuple(p / 20) for i, p in enumerate(points)},
                                          seed=int(rng.integers(1 << 30)))
        rm = roadmap_from([tuple(map(float, p)) for p in points], sorted(graph.edges))
        components = max(nx.connected_components(rm.graph), key=len)
        s, t = sorted(components)[0], sorted(components)[-1]
        if s == t:
            continue
        astar, astar_length = count_expansions(rm, s, t, heuristic=True)
        dijkstra, dijkstra_length = count_expansions(rm, s, t, heuristic=False)
        assert astar <= dijkstra
        assert astar_length == pytest.approx(dijkstra_length)
        assert astar_length == pytest.approx(nx.dijkstra_path_length(rm.graph, s, t, weight="length"))


def test_astar_expansions_sums_directed_pairs():
    kinds = [NodeKind.STATION, NodeKind.GRID, NodeKind.STATION]
    rm = roadmap_from([(0, 0), (1, 0), (2, 0)], [(0, 1), (1, 2)], kinds)
    demand = TransportMatrix(("a", "b"), [[0, 1], [2, 0]])
    assert astar_expansions(rm, demand) == 6


def edge_removal_oracle(graph, s, t):
    edges = list(graph.edges)
    for size in range(len(edges) + 1):
        for removed in combinations(edges, size):
            g = graph.copy()
            g.remove_edges_from(removed)
            if not nx.has_path(g, s, t):
                return size
    raise AssertionError("unreachable")


def node_removal_oracle(graph, s, t):
    # 직접 간선 s-t 는 하나의 제거 대상으로 취급
    elements = [n for n in graph.nodes if n not in (s, t)]
    if graph.has_edge(s, t):
        elements.append("direct")
    for size in range(len(elements) + 1):
        for removed in combinations(elements, size):
            g = graph.copy()
            for element in removed:
                if element == "direct":
                    g.remove_edge(s, t)
                else:
                    g.remove_node(element)
            if not nx.has_path(g, s, t):
                return size
    raise AssertionError("unreachable")


def test_connectivity_matches_exhaustive_removal():
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 50:
        n = int(rng.integers(3, 8))
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.45]
        rm = roadmap_from(circle_points(n), edges)
        s, t = (int(v) for v in rng.choice(n, size=2, replace=False))
        checked += 1
        if not nx.has_path(rm.graph, s, t):
            assert pair_connectivity(rm, s, t, "edge") == 0
            assert pair_connectivity(rm, s, t, "node") == 0
            continue
        edge = pair_connectivity(rm, s, t, "edge")
        node = pair_connectivity(rm, s, t, "node")
        assert edge == edge_removal_oracle(rm.graph, s, t)
        assert node == node_removal_oracle(rm.graph, s, t)
        assert node <= edge <= min(rm.degree(s), rm.degree(t))


def test_mean_connectivity_examples():
    kinds = [NodeKind.STATION] * 4
    cycle = roadmap_from([(0, 0), (2, 0), (2, 2), (0, 2)], [(0, 1), (1, 2), (2, 3), (0, 3)], kinds)
    opposite = TransportMatrix(("a", "b", "c", "d"), [[0, 0, 1, 0], [0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0]])
    assert mean_connectivity(cycle, opposite, "node") == pytest.approx(2.0)
    assert mean_connectivity(cycle, opposite, "edge") == pytest.approx(2.0)

    tree = roadmap_from([(0, 0), (2, 0), (2, 2), (0, 2)], [(0, 1), (1, 2), (1, 3)], kinds)
    everything = TransportMatrix(("a", "b", "c", "d"), np.ones((4, 4), dtype=int) - np.eye(4, dtype=int))
    assert mean_connectivity(tree, everything, "node") == pytest.approx(1.0)
    assert mean_connectivity(tree, everything, "edge") == pytest.approx(1.0)

    tree.remove_edge(1, 3)
    # 끊긴 쌍은 0으로 셈: 6쌍 중 3쌍이 d와 연결되지 않음
    assert mean_connectivity(tree, everything, "edge") == pytest.approx(0.5)


def test_connectivity_mode_validation():
    rm = roadmap_from([(0, 0), (1, 0)], [(0, 1)])
    with pytest.raises(ValueError):
        pair_connectivity(rm, 0, 1, "vertex")


def complete_graph(n):
    return roadmap_from(circle_points(n), list(combinations(range(n), 2)))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_algebraic_connectivity_complete_graphs(n):
    assert algebraic_connectivity(complete_graph(n)) == pytest.approx(float(n), abs=1e-8)


def test_algebraic_connectivity_closed_forms():
    path3 = roadmap_from([(0, 0), (1, 0), (2, 0)], [(0, 1), (1, 2)])
    assert algebraic_connectivity(path3) == pytest.approx(1.0, abs=1e-8)
    assert algebraic_connectivity(roadmap_from([(0, 0), (1, 0)], [])) == 0.0
    assert algebraic_connectivity(roadmap_from([(0, 0)], [])) == 0.0
    two_triangles = roadmap_from(circle_points(6), [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert algebraic_connectivity(two_triangles) == 0.0


def test_algebraic_connectivity_large_star_uses_sparse_solver():
    # 별 그래프 K(1, n-1)의 라플라시안 스펙트럼은 {0, 1, ..., 1, n}
    n = 2101
    rm = roadmap_from([(0.0, 0.0)] + circle_points(n - 1), [(0, i) for i in range(1, n)])
    assert rm.node_count > DENSE_EIGEN_LIMIT
    assert algebraic_connectivity(rm) == pytest.approx(1.0, rel=1e-6)


def test_normalized_spl_on_visibility_optimal_roadmap(abstract_map):
    env, _ = abstract_map
    # 지점 1과 2는 직선으로 보임
    rm = Roadmap()
    for p in env.interaction_points:
        rm.add_node(p, NodeKind.STATION)
    rm.add_edge(0, 1)
    rm.add_edge(1, 2)
    demand = TransportMatrix(tuple(env.interaction_point_ids),
                             [[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])
    assert normalized_mean_spl(rm, demand, env) == pytest.approx(1.0)
    detour = TransportMatrix(tuple(env.interaction_point_ids),
                             [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0]])
    with pytest.raises(DisconnectedDemandError):
        normalized_mean_spl(rm, detour, env)


def test_euclidean_reference_wraps_obstacle_corners(robot):
    env = make_environment(16, 12, obstacles=[(6, 4, 10, 8)], points=[(2, 6), (14, 6), (2, 2), (14, 2)],
                           robot=robot)
    r = robot.clearance_radius
    # 여유 원호에 접하는 자유 공간 최단 경로 (내접 현 근사는 이보다 짧음)
    d = math.hypot(4, 2)
    tangent = math.sqrt(d * d - r * r)
    arc = math.pi / 2 + math.atan2(2, 4) - math.acos(r / d)
    geodesic = 2 * (tangent + r * arc) + 4
    lengths = euclidean_shortest_lengths(env, [(0, 1), (2, 3)])
    assert geodesic - 0.05 <= lengths[(0, 1)] <= geodesic
    assert lengths[(2, 3)] == pytest.approx(12.0)


def test_euclidean_reference_rejects_unreachable_pair(robot):
    # 높이 전체를 막는 벽
    env = make_environment(12, 10, obstacles=[(5, 0, 7, 10)], points=[(2, 5), (10, 5)], robot=robot)
    with pytest.raises(DisconnectedDemandError):
        euclidean_shortest_lengths(env, [(0, 1)])


def test_evaluate_with_empty_demand(robot):
    env = make_environment(10, 10, points=[(2, 2), (8, 8)], robot=robot)
    rm = Roadmap()
    for p in env.interaction_points:
        rm.add_node(p, NodeKind.STATION)
    demand = uniform_demand(env, 0)
    report = evaluate(rm, demand, env)
    assert report.n_nodes == 2
    assert report.expanded_astar == 0
    assert report.mean_node_conn == 0.0
    assert report.norm_mean_spl == 1.0
    assert report.alpha == 0.0


def test_evaluate_generated_roadmap(abstract_map, abstract_result):
    env, demand = abstract_map
    report = evaluate(abstract_result.optimized, demand, env)
    assert report.n_nodes == abstract_result.optimized.node_count
    assert report.algebraic_conn > 0.0
    assert report.mean_edge_conn >= report.mean_node_conn >= 1.0
    assert 1.0 - 1e-9 <= report.norm_mean_spl <= 1.25
    assert report.expanded_astar >= 2 * len(demand.demand_pairs())


def make_report(**overrides):
    values = dict(n_nodes=10, n_edges=12, expanded_astar=30, mean_node_conn=1.5, mean_edge_conn=1.5,
                  algebraic_conn=0.5, alpha=0.2, beta=1.2, gamma_idx=0.5, norm_mean_spl=1.05)
    values.update(overrides)
    return MetricsReport(**values)


def test_best_per_metric_follows_ideal_direction():
    own = make_report(n_nodes=8, beta=1.4, norm_mean_spl=1.02, alpha=0.3)
    other = make_report(n_nodes=20, beta=1.1, norm_mean_spl=0.99, alpha=1.4)
    best = best_per_metric([own, other])
    assert best["n_nodes"] == [0]
    assert best["beta"] == [0]
    assert best["norm_mean_spl"] == [1]
    assert best["alpha"] == [1]
    assert best["n_edges"] == [0, 1]
    flags = compare_reports(own, other)
    assert flags["n_nodes"] and not flags["n_edges"] and not flags["norm_mean_spl"]


def test_mean_report():
    mean = MetricsReport.mean([make_report(n_nodes=10), make_report(n_nodes=20)])
    assert mean.n_nodes == pytest.approx(15.0)
    with pytest.raises(ValueError):
        MetricsReport.mean([])


def test_format_table_and_json():
    own, other = make_report(n_nodes=8), make_report(n_nodes=20)
    table = format_table([own, other], ["own", "grid4"])
    lines = table.splitlines()
    assert lines[0].split() == ["metric", "own", "grid4", "ideal"]
    assert "number of nodes" in lines[2] and "8*" in lines[2] and "20*" not in lines[2]
    assert len(lines) == 2 + len(METRIC_NAMES)
    assert "*" not in format_table([own], ["own"])
    # 최고값 표시는 값 칸에만 붙음
    assert all("*" not in METRIC_LABELS[name] for name in METRIC_NAMES)

    single = json.loads(format_json([own], ["own"]))
    assert single["n_nodes"] == 8
    both = json.loads(format_json([own, other], ["own", "grid4"]))
    assert both["best"]["n_nodes"] == ["own"]
    assert set(both["reports"]) == {"own", "grid4"}
