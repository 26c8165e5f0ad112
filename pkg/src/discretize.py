"""
자유 공간 이산화 모듈입니다.
상호작용 지점 노드를 먼저 배치하고, 가시성 그래프 중심성 순으로 볼록 코너 노드를 더한 뒤,
각 시드 노드에서 점점 커지는 로컬 그리드로 나머지 공간을 채웁니다.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from src.geometry import (
    GEO_TOLERANCE,
    Point,
    clearance_many,
    convex_corner_candidates,
    convex_corners,
)
from src.model import (
    Environment,
    NodeKind,
    Roadmap,
    RoadmapInputError,
    TransportMatrix,
)

logger = logging.getLogger(__name__)


class SpatialHash:
    """셀 크기가 고정된 균일 버킷 그리드. 점 근방 질의에 사용합니다."""

    def __init__(self, cell_size: float):
        if cell_size <= 0:
            raise ValueError(f"셀 크기는 양수여야 합니다: {cell_size}")
        self.cell_size = cell_size
        self._buckets: Dict[Tuple[int, int], List[int]] = {}
        self._points: Dict[int, Point] = {}

    def _cell(self, p: Point) -> Tuple[int, int]:
        return (math.floor(p.x / self.cell_size), math.floor(p.y / self.cell_size))

    def insert(self, key: int, p: Point) -> None:
        self._buckets.setdefault(self._cell(p), []).append(key)
        self._points[key] = p

    def near(self, p: Point, radius: float) -> Iterator[int]:
        """p에서 radius 이내일 수 있는 키들 (후보이며 거리 확인은 호출자 몫)"""
        reach = math.ceil(radius / self.cell_size)
        cx, cy = self._cell(p)
        for ix in range(cx - reach, cx + reach + 1):
            for iy in range(cy - reach, cy + reach + 1):
                yield from self._buckets.get((ix, iy), ())

    def any_within(self, p: Point, radius: float) -> bool:
        for key in self.near(p, radius):
            if self._points[key].distance_to(p) < radius - GEO_TOLERANCE:
                return True
        return False


@dataclass
class NodeSet:
    """
    배치된 노드 목록. 노드 id는 배치 순서(목록 인덱스)이며,
    모든 노드 쌍은 min_distance(d_v_min) 이상 떨어져 있습니다.
    """

    min_distance: float
    points: List[Point] = field(default_factory=list)
    kinds: List[NodeKind] = field(default_factory=list)
    station_ids: List[int] = field(default_factory=list)
    corner_ids: List[int] = field(default_factory=list)
    excluded_corners: List[Point] = field(default_factory=list)

    def __post_init__(self):
        self._index = SpatialHash(self.min_distance)
        for i, p in enumerate(self.points):
            self._index.insert(i, p)

    def __len__(self) -> int:
        return len(self.points)

    def is_clear(self, p: Point) -> bool:
        """배치된 모든 노드와 min_distance 이상 떨어져 있으면 True"""
        return not self._index.any_within(p, self.min_distance)

    def add(self, p: Point, kind: NodeKind) -> int:
        node_id = len(self.points)
        self.points.append(p)
        self.kinds.append(kind)
        self._index.insert(node_id, p)
        if kind == NodeKind.STATION:
            self.station_ids.append(node_id)
        elif kind == NodeKind.CORNER:
            self.corner_ids.append(node_id)
        return node_id

    def seeds(self) -> List[int]:
        """로컬 그리드 시드: 스테이션 노드 다음 코너 노드 (배치 순서)"""
        return self.station_ids + self.corner_ids

    def placed(self) -> List[Tuple[Point, NodeKind]]:
        return list(zip(self.points, self.kinds))

    def coords(self) -> np.ndarray:
        return np.array([p.as_tuple() for p in self.points], dtype=float).reshape(-1, 2)

    def to_roadmap(self) -> Roadmap:
        """간선 없는 로드맵 (노드 id = 배치 순서)"""
        rm = Roadmap()
        for p, kind in zip(self.points, self.kinds):
            rm.add_node(p, kind)
        return rm


@dataclass(frozen=True)
class GridConfig:
    """로컬 그리드 해상도 d_g와 최대 그리드 크기"""

    d_g: float
    max_size: int

    def __post_init__(self):
        if not self.max_size >= 1:
            raise ValueError(f"max_size는 1 이상이어야 합니다: {self.max_size}")
        if not (math.isfinite(self.d_g) and self.d_g > 0):
            raise ValueError(f"그리드 해상도 d_g는 양수여야 합니다: {self.d_g}")

    def validate(self, env: Environment) -> None:
        """
        대각 연결이 노드-간선 거리 제약을 만족하고 인접 노드가 최소 거리를 지키는지 확인합니다.

        Raises:
            ValueError: d_g < √2·d_ve_min 또는 d_g < d_v_min
        """
        c = env.constraints
        if self.d_g < math.sqrt(2) * c.d_ve_min - GEO_TOLERANCE:
            raise ValueError(f"d_g({self.d_g})가 √2·d_ve_min({math.sqrt(2) * c.d_ve_min:.4f})보다 작습니다")
        if self.d_g < c.d_v_min - GEO_TOLERANCE:
            raise ValueError(f"d_g({self.d_g})가 d_v_min({c.d_v_min})보다 작습니다")

    @classmethod
    def for_environment(cls, env: Environment, d_g: Optional[float] = None,
                        max_size: Optional[int] = None) -> "GridConfig":
        """기본값: d_g = √2·d_ve_min을 cm 단위로 올림(최소 d_v_min), max_size = ⌈max(폭, 높이)/d_g⌉"""
        if d_g is None:
            d_g = default_grid_resolution(env)
        if max_size is None:
            minx, miny, maxx, maxy = env.boundary.bounds()
            max_size = max(1, math.ceil(max(maxx - minx, maxy - miny) / d_g))
        cfg = cls(float(d_g), int(max_size))
        cfg.validate(env)
        return cfg


def round_up_cm(value: float) -> float:
    return math.ceil(round(value * 100, 6)) / 100


def default_grid_resolution(env: Environment) -> float:
    c = env.constraints
    return max(round_up_cm(math.sqrt(2) * c.d_ve_min), round_up_cm(c.d_v_min))


def place_station_nodes(env: Environment) -> NodeSet:
    """
    상호작용 지점마다 스테이션 노드를 하나씩 배치합니다 (필터링 없음).

    Raises:
        RoadmapInputError: 두 상호작용 지점이 d_v_min보다 가까울 때 (두 지점 id 포함)
    """
    d_v_min = env.constraints.d_v_min
    ns = NodeSet(d_v_min)
    ids = env.interaction_point_ids
    for index, p in enumerate(env.interaction_points):
        for other in ns.station_ids:
            distance = ns.points[other].distance_to(p)
            if distance < d_v_min - GEO_TOLERANCE:
                raise RoadmapInputError(
                    f"상호작용 지점 {ids[other]}와 {ids[index]} 사이 거리 {distance:.3f} m가 "
                    f"d_v_min({d_v_min:.3f} m)보다 작습니다"
                )
        ns.add(p, NodeKind.STATION)
    logger.info(f"스테이션 노드 {len(ns.station_ids)}개 배치")
    return ns


def rank_corner_candidates(env: Environment, demand: TransportMatrix) -> List[Tuple[int, float]]:
    """
    코너 후보를 가시성 그래프 매개 중심성 순으로 정렬합니다.

    그래프는 상호작용 지점, 코너 후보, 코너 원호 표본으로 만들고, 최단 경로가 어떤 코너의
    후보나 원호 표본을 지나면 그 코너의 후보가 경로를 지난 것으로 셉니다.
    점수는 수요가 있는 지점 쌍 사이 최단 경로들 중 후보를 지나는 비율의 합이며,
    동점은 후보 id(열거 순서)가 작은 쪽이 앞섭니다.

    Returns:
        (후보 id, 점수) 목록, 우선순위 내림차순
    """
    corners = convex_corners(env.free_space)
    owner = {vertex: index for index, (vertex, _) in enumerate(corners)}
    scores = [0.0] * len(corners)
    pairs = demand.unordered_pairs()
    if corners and pairs:
        graph = env.corner_graph
        for i, j in pairs:
            if not nx.has_path(graph, i, j):
                logger.debug(f"가시성 그래프에서 {i} -> {j} 경로 없음")
                continue
            paths = list(nx.all_shortest_paths(graph, i, j, weight="weight"))
            for path in paths:
                touched = {graph.nodes[node]["corner"] for node in path[1:-1]}
                for vertex in touched:
                    if vertex in owner:
                        scores[owner[vertex]] += 1.0 / len(paths)
    return sorted(enumerate(scores), key=lambda item: (-item[1], item[0]))


def place_corner_nodes(ns: NodeSet, env: Environment, demand: TransportMatrix) -> NodeSet:
    """
    코너 후보를 우선순위 순으로 배치하고, d_v_min을 어기는 후보는 건너뜁니다.
    건너뛴 후보는 ns.excluded_corners에 기록됩니다.
    """
    candidates = convex_corner_candidates(env.free_space)
    ranking = rank_corner_candidates(env, demand)
    for index, score in ranking:
        p = candidates[index]
        if ns.is_clear(p):
            ns.add(p, NodeKind.CORNER)
        else:
            ns.excluded_corners.append(p)
            logger.debug(f"코너 후보 {index} ({p.x:.3f}, {p.y:.3f}) 제외: d_v_min 위반")
    logger.info(f"코너 노드 {len(ns.corner_ids)}개 배치 (후보 {len(candidates)}개)")
    return ns


def local_grid_points(center: Point, size: int, d_g: float) -> List[Point]:
    """
    center를 중심으로 max(|i|, |j|) == size 인 링의 격자점 8·size개를 (i, j) 사전순으로 반환합니다.
    """
    if size < 1:
        raise ValueError(f"로컬 그리드 크기는 1 이상이어야 합니다: {size}")
    points = []
    for i in range(-size, size + 1):
        for j in range(-size, size + 1):
            if max(abs(i), abs(j)) != size:
                continue
            points.append(Point(center.x + i * d_g, center.y + j * d_g))
    return points


def discretize_free_space(ns: NodeSet, env: Environment, cfg: GridConfig) -> NodeSet:
    """
    시드 노드마다 로컬 그리드를 크기 1부터 max_size까지 키우며 격자 노드를 추가합니다.

    바깥 루프는 크기 s, 안쪽 루프는 시드(스테이션 다음 코너, 배치 순서)이며,
    각 링 후보는 자유 공간 안에 있고 배치된 모든 노드와 d_v_min 이상 떨어져 있을 때만 추가됩니다.
    """
    fs = env.free_space
    minx, miny, maxx, maxy = fs.bounds()
    limit = fs.clearance_radius - GEO_TOLERANCE
    seeds = ns.seeds()
    before = len(ns)

    for size in range(1, cfg.max_size + 1):
        added = 0
        for seed in seeds:
            ring = local_grid_points(ns.points[seed], size, cfg.d_g)
            inside = [p for p in ring if minx < p.x < maxx and miny < p.y < maxy]
            if not inside:
                continue
            free = clearance_many(np.array([p.as_tuple() for p in inside]), fs) >= limit
            for p, ok in zip(inside, free):
                if ok and ns.is_clear(p):
                    ns.add(p, NodeKind.GRID)
                    added += 1
        logger.debug(f"그리드 크기 {size}: 노드 {added}개 추가")

    logger.info(f"로컬 그리드 노드 {len(ns) - before}개 배치 (d_g={cfg.d_g} m, 최대 크기 {cfg.max_size})")
    return ns


def discretize(env: Environment, demand: TransportMatrix, cfg: GridConfig) -> NodeSet:
    """스테이션 → 코너 → 로컬 그리드 순으로 전체 노드 집합을 만듭니다."""
    ns = place_station_nodes(env)
    place_corner_nodes(ns, env, demand)
    return discretize_free_space(ns, env, cfg)
