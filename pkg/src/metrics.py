"""
로드맵 평가 지표 모듈입니다.

구조 지표(노드/간선 수), A* 확장 노드 수, 수요 쌍 간 최소 절단 연결도 평균,
대수적 연결도, Kansky 지수(alpha, beta, gamma), 정규화 평균 최단 경로 길이를 계산합니다.
"""

import heapq
import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.sparse.linalg import eigsh

from src.geometry import GEO_TOLERANCE
from src.model import DisconnectedDemandError, Environment, Roadmap, TransportMatrix

logger = logging.getLogger(__name__)

# 이 크기 이하의 그래프는 밀집 고윳값 분해를 사용
DENSE_EIGEN_LIMIT = 2000


@dataclass
class MetricsReport:
    """로드맵 하나의 평가 결과 (필드 순서가 표의 행 순서입니다)"""

    n_nodes: float
    n_edges: float
    expanded_astar: float
    mean_node_conn: float
    mean_edge_conn: float
    algebraic_conn: float
    alpha: float
    beta: float
    gamma_idx: float
    norm_mean_spl: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def mean(cls, reports: Sequence["MetricsReport"]) -> "MetricsReport":
        """여러 보고서의 항목별 평균"""
        if not reports:
            raise ValueError("평균을 낼 보고서가 없습니다")
        values = {f.name: float(np.mean([getattr(r, f.name) for r in reports])) for f in fields(cls)}
        return cls(**values)


METRIC_NAMES = [f.name for f in fields(MetricsReport)]

METRIC_LABELS = {
    "n_nodes": "number of nodes",
    "n_edges": "number of edges",
    "expanded_astar": "expanded nodes (A-star)",
    "mean_node_conn": "mean node connectivity",
    "mean_edge_conn": "mean edge connectivity",
    "algebraic_conn": "algebraic connectivity",
    "alpha": "alpha index",
    "beta": "beta index",
    "gamma_idx": "gamma index",
    "norm_mean_spl": "norm. shortest path len.",
}

# 지표별 이상적인 방향: min, max, 또는 1에 가까울수록 좋음
IDEAL_DIRECTIONS = {
    "n_nodes": "min",
    "n_edges": "min",
    "expanded_astar": "min",
    "mean_node_conn": "max",
    "mean_edge_conn": "max",
    "algebraic_conn": "1",
    "alpha": "1",
    "beta": "max",
    "gamma_idx": "1",
    "norm_mean_spl": "1",
}


def kansky_indices(rm: Roadmap) -> Tuple[float, float, float]:
    return kansky_from_counts(rm.node_count, rm.edge_count)


def kansky_from_counts(n_nodes: int, n_edges: int) -> Tuple[float, float, float]:
    """
    (alpha, beta, gamma) = ((E - V + 1)/(2V - 5), E/V, E/(3(V - 2)))

    Raises:
        ValueError: V < 3
    """
    if n_nodes < 3:
        raise ValueError(f"Kansky 지수는 노드 3개 이상에서 정의됩니다: |V|={n_nodes}")
    alpha = (n_edges - n_nodes + 1) / (2 * n_nodes - 5)
    beta = n_edges / n_nodes
    gamma = n_edges / (3 * (n_nodes - 2))
    return alpha, beta, gamma


def count_expansions(rm: Roadmap, s: int, t: int, heuristic: bool = True) -> Tuple[int, float]:
    """
    A*(heuristic=True, 유클리드 휴리스틱) 또는 Dijkstra(heuristic=False)로 s -> t 를 탐색합니다.

    열린 집합에서 꺼낸 노드 수(목표 포함)를 셉니다. f 동점은 g가 큰 쪽, 그다음 노드 id가 작은 쪽이 먼저입니다.

    Returns:
        (확장 노드 수, 경로 길이)

    Raises:
        DisconnectedDemandError: 경로가 없을 때
    """
    graph = rm.graph
    goal = rm.point(t)

    def h(n: int) -> float:
        return rm.point(n).distance_to(goal) if heuristic else 0.0

    g = {s: 0.0}
    closed = set()
    heap = [(h(s), -0.0, s)]
    expansions = 0
    while heap:
        _, _, n = heapq.heappop(heap)
        if n in closed:
            continue
        closed.add(n)
        expansions += 1
        if n == t:
            return expansions, g[n]
        for m in sorted(graph.neighbors(n)):
            if m in closed:
                continue
            candidate = g[n] + graph.edges[n, m]["length"]
            if candidate < g.get(m, math.inf):
                g[m] = candidate
                heapq.heappush(heap, (candidate + h(m), -candidate, m))
    raise DisconnectedDemandError((s, t))


def _pair_label(demand: TransportMatrix, i: int, j: int) -> Tuple[str, str]:
    return demand.order[i], demand.order[j]


def astar_expansions(rm: Roadmap, demand: TransportMatrix, env: Optional[Environment] = None) -> int:
    """
    방향이 있는 모든 수요 쌍에 대한 A* 확장 노드 수의 합.

    Raises:
        DisconnectedDemandError: 도달할 수 없는 수요 쌍이 있을 때
    """
    stations = rm.station_node_ids(env)
    total = 0
    for i, j in demand.demand_pairs():
        try:
            count, _ = count_expansions(rm, stations[i], stations[j])
        except DisconnectedDemandError:
            raise DisconnectedDemandError(_pair_label(demand, i, j)) from None
        total += count
    return total


def _edge_flow_network(rm: Roadmap) -> nx.DiGraph:
    network = nx.DiGraph()
    network.add_nodes_from(rm.nodes())
    for a, b in rm.edges():
        network.add_edge(a, b, capacity=1)
        network.add_edge(b, a, capacity=1)
    return network


def _node_flow_network(rm: Roadmap, s: int, t: int) -> nx.DiGraph:
    # 노드 n을 (n, 0) -> (n, 1) 용량 1의 호로 나눕니다. s와 t는 용량 제한 없음
    network = nx.DiGraph()
    for n in rm.nodes():
        if n in (s, t):
            network.add_edge((n, 0), (n, 1))
        else:
            network.add_edge((n, 0), (n, 1), capacity=1)
    for a, b in rm.edges():
        network.add_edge((a, 1), (b, 0), capacity=1)
        network.add_edge((b, 1), (a, 0), capacity=1)
    return network


def pair_connectivity(rm: Roadmap, s: int, t: int, mode: str) -> int:
    """
    s와 t를 끊기 위해 제거해야 하는 최소 간선 수(edge) 또는 노드 수(node)를 최대 유량으로 구합니다.
    node 모드에서 s-t 직접 간선은 경로 하나로 셉니다.
    """
    if mode not in ("node", "edge"):
        raise ValueError(f"연결도 모드는 node 또는 edge 입니다: {mode}")
    if not nx.has_path(rm.graph, s, t):
        return 0
    if mode == "edge":
        return int(nx.maximum_flow_value(_edge_flow_network(rm), s, t))
    return int(nx.maximum_flow_value(_node_flow_network(rm, s, t), (s, 1), (t, 0)))


def mean_connectivity(rm: Roadmap, demand: TransportMatrix, mode: str,
                      env: Optional[Environment] = None) -> float:
    """
    무향 수요 쌍에 대한 최소 절단 연결도의 평균. 도달할 수 없는 쌍은 0으로 세고 경고를 남깁니다.
    """
    stations = rm.station_node_ids(env)
    pairs = demand.unordered_pairs()
    if not pairs:
        return 0.0
    values = []
    for i, j in pairs:
        s, t = stations[i], stations[j]
        if not nx.has_path(rm.graph, s, t):
            logger.warning(f"수요 쌍 {demand.order[i]} - {demand.order[j]}이(가) 연결되어 있지 않습니다 (연결도 0)")
            values.append(0)
            continue
        values.append(pair_connectivity(rm, s, t, mode))
    return float(np.mean(values))


def algebraic_connectivity(rm: Roadmap) -> float:
    """
    가중치 없는 라플라시안의 두 번째로 작은 고윳값. 그래프가 끊어져 있으면 0.
    """
    n = rm.node_count
    if n < 2 or not nx.is_connected(rm.graph):
        return 0.0
    laplacian = nx.laplacian_matrix(rm.graph, nodelist=rm.nodes(), weight=None).astype(float)
    if n <= DENSE_EIGEN_LIMIT:
        eigenvalues = np.linalg.eigvalsh(laplacian.toarray())
    else:
        eigenvalues = np.sort(eigsh(laplacian.tocsc(), k=2, sigma=-1e-3, which="LM",
                                    return_eigenvectors=False))
    return max(0.0, float(eigenvalues[1]))


def euclidean_shortest_lengths(env: Environment, pairs: Sequence[Tuple[int, int]]) -> Dict[Tuple[int, int], float]:
    """
    확장 장애물을 내접 현으로 근사한 자유 영역 위의 최단 경로 길이.
    영역이 C_free 를 포함하므로 C_free 안의 어떤 경로도 이 값보다 짧을 수 없습니다.

    Raises:
        DisconnectedDemandError: 자유 공간에서 두 지점이 이어지지 않을 때
    """
    graph = env.geodesic_graph
    ids = env.interaction_point_ids
    lengths = {}
    for i, j in pairs:
        try:
            lengths[(i, j)] = nx.dijkstra_path_length(graph, i, j, weight="weight")
        except nx.NetworkXNoPath:
            raise DisconnectedDemandError((ids[i], ids[j]), f"자유 공간에서 {ids[i]} -> {ids[j]} 경로가 없습니다") from None
    return lengths


def normalized_mean_spl(rm: Roadmap, demand: TransportMatrix, env: Environment) -> float:
    """
    (수요 쌍의 로드맵 최단 경로 길이 평균) / (같은 쌍의 자유 공간 유클리드 최단 경로 길이 평균).
    수요가 없으면 1.0.

    Raises:
        DisconnectedDemandError: 로드맵에서 도달할 수 없는 수요 쌍이 있을 때
    """
    pairs = demand.demand_pairs()
    if not pairs:
        return 1.0
    stations = rm.station_node_ids(env)
    roadmap_lengths = []
    for i, j in pairs:
        try:
            roadmap_lengths.append(nx.dijkstra_path_length(rm.graph, stations[i], stations[j], weight="length"))
        except nx.NetworkXNoPath:
            raise DisconnectedDemandError(_pair_label(demand, i, j)) from None
    reference = euclidean_shortest_lengths(env, pairs)
    return float(np.mean(roadmap_lengths) / np.mean([reference[p] for p in pairs]))


def evaluate(rm: Roadmap, demand: TransportMatrix, env: Environment) -> MetricsReport:
    """모든 지표를 계산합니다. 노드가 3개 미만이면 Kansky 지수는 0으로 둡니다."""
    if rm.node_count >= 3:
        alpha, beta, gamma = kansky_indices(rm)
    else:
        alpha = beta = gamma = 0.0
    report = MetricsReport(
        n_nodes=rm.node_count,
        n_edges=rm.edge_count,
        expanded_astar=astar_expansions(rm, demand, env),
        mean_node_conn=mean_connectivity(rm, demand, "node", env),
        mean_edge_conn=mean_connectivity(rm, demand, "edge", env),
        algebraic_conn=algebraic_connectivity(rm),
        alpha=alpha,
        beta=beta,
        gamma_idx=gamma,
        norm_mean_spl=normalized_mean_spl(rm, demand, env),
    )
    logger.debug(f"평가 결과: {report}")
    return report


def _score(name: str, value: float) -> float:
    """작을수록 좋은 점수로 바꿉니다."""
    direction = IDEAL_DIRECTIONS[name]
    if direction == "min":
        return value
    if direction == "max":
        return -value
    return abs(value - 1.0)


def best_per_metric(reports: Sequence[MetricsReport]) -> Dict[str, List[int]]:
    """지표별로 이상적인 방향에서 가장 좋은 보고서 인덱스 목록 (동률 포함)"""
    best = {}
    for name in METRIC_NAMES:
        scores = [_score(name, getattr(r, name)) for r in reports]
        top = min(scores)
        best[name] = [i for i, s in enumerate(scores) if s <= top + GEO_TOLERANCE]
    return best


def compare_reports(report: MetricsReport, other: MetricsReport) -> Dict[str, bool]:
    """report가 other보다 엄격히 나은 지표를 True로 표시합니다."""
    return {
        name: _score(name, getattr(report, name)) < _score(name, getattr(other, name)) - GEO_TOLERANCE
        for name in METRIC_NAMES
    }


def _format_value(name: str, value: float) -> str:
    if name in ("n_nodes", "n_edges", "expanded_astar") and float(value).is_integer():
        return str(int(value))
    return f"{value:.3f}"


def format_table(reports: Sequence[MetricsReport], names: Sequence[str]) -> str:
    """
    보고서들을 지표별 행으로 정렬한 텍스트 표로 만듭니다. 보고서가 여러 개면 행마다 최고값에 * 를 붙입니다.
    """
    best = best_per_metric(reports) if len(reports) > 1 else {}
    header = ["metric"] + list(names) + ["ideal"]
    rows = [header]
    for name in METRIC_NAMES:
        row = [METRIC_LABELS[name]]
        for index, report in enumerate(reports):
            cell = _format_value(name, getattr(report, name))
            if index in best.get(name, []):
                cell += "*"
            row.append(cell)
        row.append(IDEAL_DIRECTIONS[name])
        rows.append(row)

    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = []
    for r, row in enumerate(rows):
        cells = [row[0].ljust(widths[0])] + [row[c].rjust(widths[c]) for c in range(1, len(row))]
        lines.append("  ".join(cells).rstrip())
        if r == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines)


def format_json(reports: Sequence[MetricsReport], names: Sequence[str]) -> str:
    """보고서를 JSON으로 직렬화합니다. 보고서가 하나면 객체, 여러 개면 이름별 객체입니다."""
    if len(reports) == 1:
        return json.dumps(reports[0].to_dict(), indent=2)
    document = {
        "reports": {name: r.to_dict() for name, r in zip(names, reports)},
        "best": {metric: [names[i] for i in idx] for metric, idx in best_per_metric(reports).items()},
    }
    return json.dumps(document, indent=2)
