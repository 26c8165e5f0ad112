"""
수요 기반 로드맵 최적화 모듈입니다.

수요 쌍마다 벌점이 적용된 Yen K-최단 경로를 구하고, 사용 횟수를 누적해
사용되지 않은 요소를 제거한 뒤, 중요도 I(e)로 교차 간선을 정리하고 구조를 다듬습니다.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import shapely
from scipy.spatial import cKDTree

from src.edges import point_segment_distances, segment_clear_of_nodes
from src.geometry import GEO_TOLERANCE, Point, Segment, segment_in_free_space, segments_cross
from src.model import (
    DisconnectedDemandError,
    Environment,
    NodeKind,
    Roadmap,
    TransportMatrix,
    edge_key,
)

logger = logging.getLogger(__name__)

Path = List[int]
Edge = Tuple[int, int]


@dataclass(frozen=True)
class PenaltyPolicy:
    """
    Yen 탐색 중 간선 비용 벌점 정책

    Attributes:
        base: 벌점 계수의 밑. 비용 = 길이 x base^u_ij(e). 1.0이면 벌점 없음
        k_max: 기본 k 규칙의 상한 (k = min(T_ij, k_max))
        k_rule: T_ij -> k 를 직접 지정하는 함수 (선택)
    """

    base: float = 1.1
    k_max: int = 5
    k_rule: Optional[Callable[[int], int]] = None

    def __post_init__(self):
        if not (math.isfinite(self.base) and self.base >= 1.0):
            raise ValueError(f"벌점 밑(base)은 1 이상이어야 합니다: {self.base}")
        if self.k_max < 1:
            raise ValueError(f"k_max는 1 이상이어야 합니다: {self.k_max}")


def select_k(T_ij: int, policy: PenaltyPolicy) -> int:
    """운송 작업 수 T_ij에 대한 경로 수 k"""
    if T_ij <= 0:
        raise ValueError(f"k는 양의 수요에 대해서만 정의됩니다: T_ij={T_ij}")
    k = policy.k_rule(T_ij) if policy.k_rule is not None else min(int(T_ij), policy.k_max)
    if k < 1:
        raise ValueError(f"k 규칙이 1보다 작은 값을 반환했습니다: T_ij={T_ij}, k={k}")
    return k


def path_edges(path: Sequence[int]) -> List[Edge]:
    return [edge_key(a, b) for a, b in zip(path, path[1:])]


def yen_k_shortest(rm: Roadmap, s: int, t: int, k: int, policy: PenaltyPolicy) -> List[Path]:
    """
    벌점이 적용된 Yen K-최단 무루프 경로.

    경로 m+1을 찾는 동안 간선 비용은 length(e) x base^u_ij(e)이며, u_ij(e)는 이미 채택된
    m개 경로에서 e가 나타난 횟수입니다. 후보 경로는 채택할 때마다 현재 u_ij로 다시 평가하고
    (비용, 경로) 순으로 고릅니다.

    Raises:
        ValueError: s == t 또는 k < 1
        KeyError: s 또는 t가 로드맵에 없을 때
        DisconnectedDemandError: s와 t 사이에 경로가 없을 때
    """
    if s == t:
        raise ValueError(f"시작과 끝 노드가 같습니다: {s}")
    if k < 1:
        raise ValueError(f"k는 1 이상이어야 합니다: {k}")
    for node in (s, t):
        if node not in rm.graph:
            raise KeyError(f"로드맵에 노드 {node}가 없습니다")

    graph = rm.graph
    usage: Counter = Counter()

    def cost(path: Sequence[int]) -> float:
        return sum(graph.edges[a, b]["length"] * policy.base ** usage[edge_key(a, b)]
                   for a, b in zip(path, path[1:]))

    try:
        first = nx.dijkstra_path(graph, s, t, weight="length")
    except nx.NetworkXNoPath:
        raise DisconnectedDemandError((s, t)) from None

    accepted: List[Path] = [first]
    seen = {tuple(first)}
    usage.update(path_edges(first))
    candidates = set()

    while len(accepted) < k:
        previous = accepted[-1]
        for i in range(len(previous) - 1):
            spur = previous[i]
            root = previous[: i + 1]
            blocked_edges = {edge_key(p[i], p[i + 1]) for p in accepted if len(p) > i + 1 and p[: i + 1] == root}
            blocked_nodes = set(root[:-1])

            def weight(a, b, data, blocked_edges=blocked_edges, blocked_nodes=blocked_nodes):
                if a in blocked_nodes or b in blocked_nodes or edge_key(a, b) in blocked_edges:
                    return None
                return data["length"] * policy.base ** usage[edge_key(a, b)]

            try:
                spur_path = nx.dijkstra_path(graph, spur, t, weight=weight)
            except nx.NetworkXNoPath:
                continue
            total = tuple(root[:-1] + spur_path)
            if total not in seen:
                candidates.add(total)

        if not candidates:
            break
        best = min(candidates, key=lambda p: (cost(p), p))
        candidates.discard(best)
        seen.add(best)
        accepted.append(list(best))
        usage.update(path_edges(best))

    return accepted


@dataclass
class PathSet:
    """
    수요 쌍별 경로 목록과 사용 횟수 기록

    paths의 키는 (시작 노드 id, 끝 노드 id)이며, usage는 모든 쌍에 걸친 간선별 합계 u(e)입니다.
    """

    paths: Dict[Tuple[int, int], List[Path]] = field(default_factory=dict)
    local_usage: Dict[Tuple[int, int], Counter] = field(default_factory=dict)
    usage: Counter = field(default_factory=Counter)

    @property
    def nodes(self) -> set:
        return {n for paths in self.paths.values() for path in paths for n in path}

    @property
    def edges(self) -> set:
        return set(self.usage)

    def path_count(self) -> int:
        return sum(len(paths) for paths in self.paths.values())


def accumulate_usage(paths_by_pair: Dict[Tuple[int, int], List[Path]]) -> PathSet:
    """모든 (쌍, 경로)에서 간선 등장 횟수를 누적합니다."""
    ps = PathSet()
    for pair, paths in paths_by_pair.items():
        local: Counter = Counter()
        for path in paths:
            local.update(path_edges(path))
        ps.paths[pair] = [list(p) for p in paths]
        ps.local_usage[pair] = local
        ps.usage.update(local)
    return ps


def compute_path_set(rm: Roadmap, demand: TransportMatrix, station_nodes: Sequence[int],
                     policy: PenaltyPolicy) -> PathSet:
    """
    수요 쌍을 행 우선 순서로 처리해 Yen 경로를 구하고 사용 횟수를 누적합니다.

    Raises:
        DisconnectedDemandError: 어떤 수요 쌍에 경로가 없을 때 (상호작용 지점 id 쌍 포함)
    """
    paths_by_pair: Dict[Tuple[int, int], List[Path]] = {}
    for i, j in demand.demand_pairs():
        s, t = station_nodes[i], station_nodes[j]
        k = select_k(int(demand.T[i, j]), policy)
        try:
            paths = yen_k_shortest(rm, s, t, k, policy)
        except DisconnectedDemandError:
            pair = (demand.order[i], demand.order[j])
            raise DisconnectedDemandError(pair) from None
        logger.debug(f"수요 쌍 {demand.order[i]} -> {demand.order[j]}: k={k}, 경로 {len(paths)}개")
        paths_by_pair[(s, t)] = paths
    ps = accumulate_usage(paths_by_pair)
    logger.info(f"Yen 경로 {ps.path_count()}개 (수요 쌍 {len(paths_by_pair)}개), 사용 간선 {len(ps.edges)}개")
    return ps


def prune_unused(rm: Roadmap, ps: PathSet) -> Roadmap:
    """경로에 쓰인 노드/간선과 스테이션 노드만 남기고, 간선 usage를 u(e)로 설정합니다."""
    keep_nodes = ps.nodes | set(rm.station_nodes())
    pruned = Roadmap()
    for n in rm.nodes():
        if n in keep_nodes:
            pruned.add_node(rm.point(n), rm.kind(n), n)
    for a, b in rm.edges():
        u = ps.usage.get((a, b), 0)
        if u > 0:
            pruned.add_edge(a, b, u)
    logger.info(
        f"가지치기: 노드 {rm.node_count} -> {pruned.node_count}, 간선 {rm.edge_count} -> {pruned.edge_count}"
    )
    return pruned


def find_crossings(rm: Roadmap) -> List[Tuple[Edge, Edge]]:
    """서로 교차하는 간선 쌍 목록 (STRtree 후보 + 정확한 교차 판정)"""
    edges = rm.edges()
    if len(edges) < 2:
        return []
    lines = shapely.linestrings([[rm.point(a).as_tuple(), rm.point(b).as_tuple()] for a, b in edges])
    tree = shapely.STRtree(lines)
    left, right = tree.query(lines, predicate="intersects")
    crossings = []
    for i, j in sorted({(int(i), int(j)) for i, j in zip(left, right) if i < j}):
        if segments_cross(rm.segment(*edges[i]), rm.segment(*edges[j])):
            crossings.append((edges[i], edges[j]))
    return crossings


def importance(edge: Edge, crossing: nx.Graph, usage: Callable[[Edge], int]) -> int:
    """I(e) = u(e) - 교차하는 간선들의 u 합"""
    return usage(edge) - sum(usage(other) for other in crossing.neighbors(edge))


def planarize(rm: Roadmap, ps: Optional[PathSet] = None) -> Roadmap:
    """
    교차가 없어질 때까지 충돌 그룹(교차 관계의 연결 요소)마다 I(e)가 가장 큰 간선을 남기고
    그 간선과 교차하는 간선을 지웁니다. 동점은 u(e)가 큰 쪽, 그다음 간선 id가 작은 쪽입니다.

    ps가 주어지면 그 경로 집합의 시작/끝 쌍이 모두 연결되어 있는지 마지막에 확인합니다.

    Raises:
        DisconnectedDemandError: 평면화로 수요 쌍이 끊어졌을 때
    """
    result = rm.copy()
    if ps is not None:
        def usage(e):
            return ps.usage.get(e, 0)
    else:
        def usage(e):
            return result.usage(*e)

    removed_total = 0
    while True:
        crossings = find_crossings(result)
        if not crossings:
            break
        crossing = nx.Graph()
        crossing.add_edges_from(crossings)
        removed = set()
        for group in sorted((sorted(c) for c in nx.connected_components(crossing)), key=lambda g: g[0]):
            keep = min(group, key=lambda e: (-importance(e, crossing, usage), -usage(e), e))
            removed.update(crossing.neighbors(keep))
        for a, b in sorted(removed):
            result.remove_edge(a, b)
        removed_total += len(removed)
        logger.debug(f"평면화 반복: 교차 {len(crossings)}쌍, 간선 {len(removed)}개 제거")

    logger.info(f"평면화: 간선 {removed_total}개 제거")
    if ps is not None:
        for s, t in ps.paths:
            if not nx.has_path(result.graph, s, t):
                raise DisconnectedDemandError((s, t), f"평면화 후 노드 {s} -> {t} 연결이 끊어졌습니다")
    return result


def _remove_spurs(rm: Roadmap) -> int:
    removed = 0
    while True:
        spurs = [n for n in rm.nodes() if rm.kind(n) != NodeKind.STATION and rm.degree(n) <= 1]
        if not spurs:
            return removed
        for n in spurs:
            rm.remove_node(n)
        removed += len(spurs)


def _is_chain_node(rm: Roadmap, n: int) -> bool:
    return rm.kind(n) != NodeKind.STATION and rm.degree(n) == 2


def find_chains(rm: Roadmap) -> List[Tuple[int, List[int], int]]:
    """
    차수 2인 비스테이션 노드의 최대 연쇄 목록 (끝점 u, 내부 노드들, 끝점 v).
    끝점이 같거나 고리만으로 이루어진 연쇄는 제외합니다.
    """
    visited = set()
    chains = []
    for start in rm.nodes():
        if start in visited or not _is_chain_node(rm, start):
            continue
        visited.add(start)
        ends = []
        sides = []
        cyclic = False
        for first in rm.neighbors(start):
            prev, cur = start, first
            side = []
            while _is_chain_node(rm, cur):
                if cur == start:
                    cyclic = True
                    break
                visited.add(cur)
                side.append(cur)
                nxt = [m for m in rm.neighbors(cur) if m != prev]
                prev, cur = cur, nxt[0]
            ends.append(cur)
            sides.append(side)
            if cyclic:
                break
        if cyclic or ends[0] == ends[1]:
            continue
        interior = list(reversed(sides[0])) + [start] + sides[1]
        chains.append((ends[0], interior, ends[1]))
    return chains


def _crosses_any(rm: Roadmap, seg: Segment, ignore: set) -> bool:
    for e in rm.edges():
        if e in ignore:
            continue
        if segments_cross(seg, rm.segment(*e)):
            return True
    return False


def _reinsertion_points(rm: Roadmap, env: Environment, u: int, v: int) -> List[Point]:
    """
    u-v 선분을 같은 간격으로 나누는 내부 점들. 간격이 d_v_min 이상인 가장 큰 분할 수부터 줄여 가며,
    다른 노드와 d_v_min, 비인접 간선과 d_ve_min을 지키는 첫 분할을 고릅니다.
    """
    c = env.constraints
    a, b = rm.point(u), rm.point(v)
    length = a.distance_to(b)
    others = [n for n in rm.nodes() if n not in (u, v)]
    other_xy = rm.points_array(others)
    edge_list = [e for e in rm.edges()]
    count = math.floor(length / c.d_v_min + GEO_TOLERANCE)
    while count >= 2:
        points = [Point(a.x + (b.x - a.x) * m / count, a.y + (b.y - a.y) * m / count) for m in range(1, count)]
        if _points_admissible(rm, points, other_xy, edge_list, c.d_v_min, c.d_ve_min):
            return points
        count -= 1
    return []


def _points_admissible(rm: Roadmap, points: List[Point], other_xy: np.ndarray, edge_list: List[Edge],
                       d_v_min: float, d_ve_min: float) -> bool:
    xy = np.array([p.as_tuple() for p in points])
    if len(other_xy):
        diff = xy[:, None, :] - other_xy[None, :, :]
        if (np.hypot(diff[..., 0], diff[..., 1]) < d_v_min - GEO_TOLERANCE).any():
            return False
    for a, b in edge_list:
        pa = np.array(rm.point(a).as_tuple())
        pb = np.array(rm.point(b).as_tuple())
        if (point_segment_distances(pa, pb, xy) < d_ve_min - GEO_TOLERANCE).any():
            return False
    return True


def refine(rm: Roadmap, env: Environment) -> Roadmap:
    """
    구조 정리:
    (i) 스테이션이 아닌 차수 1 이하 노드를 더 없을 때까지 제거
    (ii) 차수 2 비스테이션 노드 연쇄를 직선 간선으로 바꾸고, 간격이 d_v_min 이상이 되도록
         중간 노드를 다시 삽입 (자유 공간, d_ve_min, 교차 조건을 통과할 때만)
    """
    result = rm.copy()
    spurs = _remove_spurs(result)
    c = env.constraints
    straightened = 0

    for u, interior, v in find_chains(result):
        if result.has_edge(u, v):
            continue
        seg = Segment(result.point(u), result.point(v))
        if not segment_in_free_space(seg, env.free_space):
            continue

        chain_path = [u] + interior + [v]
        chain_edges = set(path_edges(chain_path))
        keep = [n for n in result.nodes() if n not in interior]
        coords = result.points_array(keep)
        tree = cKDTree(coords)
        exclude = {keep.index(u), keep.index(v)}
        a_xy, b_xy = np.array(seg.a.as_tuple()), np.array(seg.b.as_tuple())
        if not segment_clear_of_nodes(a_xy, b_xy, coords, tree, exclude, c.d_ve_min):
            continue
        if _crosses_any(result, seg, chain_edges):
            continue

        chain_usage = max(result.usage(a, b) for a, b in chain_edges)
        for n in interior:
            result.remove_node(n)
        points = _reinsertion_points(result, env, u, v)
        sequence = [u]
        for p in points:
            sequence.append(result.add_node(p, NodeKind.REINSERTED))
        sequence.append(v)
        for a, b in zip(sequence, sequence[1:]):
            result.add_edge(a, b, chain_usage)
        straightened += 1
        logger.debug(f"연쇄 {u} -> {v} 직선화: 내부 노드 {len(interior)}개 -> 재삽입 {len(points)}개")

    logger.info(f"정리: 막다른 노드 {spurs}개 제거, 연쇄 {straightened}개 직선화")
    return result


@dataclass
class OptimizationStages:
    """최적화 단계별 결과 (노드 id는 전체 로드맵의 id를 유지)"""

    path_set: PathSet
    reduced: Roadmap
    planar: Roadmap
    optimized: Roadmap


def optimize_stages(full: Roadmap, demand: TransportMatrix, env: Environment,
                    policy: Optional[PenaltyPolicy] = None,
                    station_nodes: Optional[Sequence[int]] = None) -> OptimizationStages:
    """yen -> 누적 -> 가지치기 -> 평면화 -> 정리 를 차례로 실행하고 단계별 로드맵을 모두 돌려줍니다."""
    policy = policy or PenaltyPolicy()
    if station_nodes is None:
        station_nodes = full.station_node_ids(env)
    ps = compute_path_set(full, demand, station_nodes, policy)
    reduced = prune_unused(full, ps)
    planar = planarize(reduced, ps)
    optimized = refine(planar, env)
    return OptimizationStages(ps, reduced, planar, optimized)


def optimize_roadmap(full: Roadmap, demand: TransportMatrix, env: Environment,
                     policy: Optional[PenaltyPolicy] = None) -> Roadmap:
    """전체 로드맵을 최적화한 뒤 노드 id를 0..n-1로 다시 매겨 반환합니다."""
    return optimize_stages(full, demand, env, policy).optimized.compacted()
