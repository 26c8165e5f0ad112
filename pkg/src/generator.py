"""
로드맵 생성 파이프라인 모듈입니다.
노드 배치 -> 전체 간선 -> 수요 기반 최적화 단계를 묶고, 단계별 로드맵과 제약 검사를 제공합니다.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from src.discretize import (
    GridConfig,
    NodeSet,
    discretize_free_space,
    place_corner_nodes,
    place_station_nodes,
)
from src.edges import build_full_edges, point_segment_distances
from src.geometry import (
    GEO_TOLERANCE,
    clearance_many,
    segments_in_free_space,
    visibility_graph,
)
from src.model import Environment, Roadmap, TransportMatrix
from src.optimize import PathSet, PenaltyPolicy, find_crossings, optimize_stages

logger = logging.getLogger(__name__)

STAGES = ("visibility", "full", "reduced", "optimized")


@dataclass
class ConstraintReport:
    """로드맵 제약 위반 목록. 모두 비어 있으면 ok."""

    close_nodes: List[Tuple[int, int, float]] = field(default_factory=list)
    close_edges: List[Tuple[int, Tuple[int, int], float]] = field(default_factory=list)
    nodes_outside: List[int] = field(default_factory=list)
    edges_outside: List[Tuple[int, int]] = field(default_factory=list)
    crossings: List[Tuple[Tuple[int, int], Tuple[int, int]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.close_nodes or self.close_edges or self.nodes_outside
                    or self.edges_outside or self.crossings)

    def summary(self) -> str:
        return (f"노드 간 거리 위반 {len(self.close_nodes)}, 노드-간선 거리 위반 {len(self.close_edges)}, "
                f"자유 공간 밖 노드 {len(self.nodes_outside)}, 자유 공간 밖 간선 {len(self.edges_outside)}, "
                f"교차 {len(self.crossings)}")


def check_roadmap_constraints(rm: Roadmap, env: Environment) -> ConstraintReport:
    """
    로드맵이 세 가지 기하 제약과 평면성을 만족하는지 검사합니다.

    - 모든 노드 쌍 거리 >= d_v_min
    - 노드와 그 노드에 붙지 않은 간선 사이 거리 >= d_ve_min
    - 모든 노드와 간선이 자유 공간 안
    - 교차하는 간선 없음
    """
    report = ConstraintReport()
    c = env.constraints
    nodes = rm.nodes()
    if not nodes:
        return report
    coords = rm.points_array(nodes)
    tree = cKDTree(coords)

    for i, j in sorted(tree.query_pairs(c.d_v_min - GEO_TOLERANCE)):
        distance = float(np.hypot(*(coords[i] - coords[j])))
        if distance < c.d_v_min - GEO_TOLERANCE:
            report.close_nodes.append((nodes[i], nodes[j], distance))

    free = clearance_many(coords, env.free_space) >= env.free_space.clearance_radius - GEO_TOLERANCE
    report.nodes_outside = [n for n, ok in zip(nodes, free) if not ok]

    edges = rm.edges()
    index = {n: k for k, n in enumerate(nodes)}
    for a, b in edges:
        pa, pb = coords[index[a]], coords[index[b]]
        reach = float(np.hypot(*(pb - pa))) / 2.0 + c.d_ve_min
        near = [k for k in tree.query_ball_point((pa + pb) / 2.0, reach) if nodes[k] not in (a, b)]
        if not near:
            continue
        distances = point_segment_distances(pa, pb, coords[near])
        for k, distance in zip(near, distances):
            if distance < c.d_ve_min - GEO_TOLERANCE:
                report.close_edges.append((nodes[k], (a, b), float(distance)))

    if edges:
        free_edges = segments_in_free_space([rm.segment(a, b) for a, b in edges], env.free_space)
        report.edges_outside = [e for e, ok in zip(edges, free_edges) if not ok]
    report.crossings = find_crossings(rm)
    return report


def visibility_roadmap(ns: NodeSet, env: Environment) -> Roadmap:
    """배치된 노드(스테이션, 코너)를 가시성 그래프로 이은 로드맵"""
    rm = ns.to_roadmap()
    graph = visibility_graph(ns.points, env.free_space)
    for a, b in sorted(graph.edges):
        rm.add_edge(min(a, b), max(a, b))
    return rm


@dataclass
class GenerationResult:
    """생성 파이프라인의 단계별 결과 (visibility, full, reduced, optimized 모두 노드 id 0..n-1)"""

    visibility: Roadmap
    full: Roadmap
    reduced: Roadmap
    optimized: Roadmap
    grid: GridConfig
    path_set: PathSet
    excluded_corners: list
    constraints: ConstraintReport

    def stage(self, name: str) -> Roadmap:
        if name not in STAGES:
            raise ValueError(f"알 수 없는 단계입니다: {name} (가능: {', '.join(STAGES)})")
        return getattr(self, name)


class RoadmapGenerator:
    """
    연속 공간 로드맵 생성기
    """

    def __init__(self, penalty_base: float = 1.1, k_max: int = 5, demand_scale: float = 1.0,
                 grid_resolution: Optional[float] = None, max_grid_size: Optional[int] = None,
                 candidate_radius_factor: Optional[float] = 3.0):
        """
        Args:
            penalty_base: Yen 벌점 계수의 밑
            k_max: 수요 쌍당 최대 경로 수
            demand_scale: 운송 행렬 배율 (시간 단위 조정)
            grid_resolution: 로컬 그리드 해상도 d_g (None이면 자동)
            max_grid_size: 최대 로컬 그리드 크기 (None이면 자동)
            candidate_radius_factor: 간선 후보 반경 = factor x d_g (None이면 모든 쌍)
        """
        self.policy = PenaltyPolicy(base=penalty_base, k_max=k_max)
        if demand_scale <= 0:
            raise ValueError(f"수요 배율은 양수여야 합니다: {demand_scale}")
        self.demand_scale = demand_scale
        self.grid_resolution = grid_resolution
        self.max_grid_size = max_grid_size
        self.candidate_radius_factor = candidate_radius_factor

    @classmethod
    def from_settings(cls, settings: Dict[str, Any]) -> "RoadmapGenerator":
        """config_loader.load_roadmap_settings() 결과로 생성기를 만듭니다."""
        return cls(
            penalty_base=float(settings["penalty_base"]),
            k_max=int(settings["k_max"]),
            demand_scale=float(settings["demand_scale"]),
            grid_resolution=settings.get("grid_resolution"),
            max_grid_size=settings.get("max_grid_size"),
            candidate_radius_factor=settings.get("candidate_radius_factor"),
        )

    def grid_config(self, env: Environment) -> GridConfig:
        return GridConfig.for_environment(env, self.grid_resolution, self.max_grid_size)

    def generate(self, env: Environment, demand: TransportMatrix) -> GenerationResult:
        """
        환경과 운송 행렬로 로드맵을 생성합니다.

        Raises:
            RoadmapInputError: 상호작용 지점 간 거리가 d_v_min보다 작을 때
            DisconnectedDemandError: 수요 쌍이 연결되지 않을 때
            ValueError: 그리드 해상도가 제약을 만족하지 않을 때
        """
        cfg = self.grid_config(env)
        scaled = demand.scaled(self.demand_scale)

        ns = place_station_nodes(env)
        place_corner_nodes(ns, env, scaled)
        visibility = visibility_roadmap(ns, env)
        discretize_free_space(ns, env, cfg)

        radius = math.inf if self.candidate_radius_factor is None else self.candidate_radius_factor * cfg.d_g
        full = build_full_edges(ns, env, radius)
        stages = optimize_stages(full, scaled, env, self.policy, station_nodes=ns.station_ids)
        optimized = stages.optimized.compacted()

        report = check_roadmap_constraints(optimized, env)
        if not report.ok:
            logger.warning(f"최적화된 로드맵이 제약을 위반합니다: {report.summary()}")
        logger.info(
            f"로드맵 생성 완료: 전체 {full.node_count}/{full.edge_count} -> "
            f"최적화 {optimized.node_count}/{optimized.edge_count} (노드/간선)"
        )
        return GenerationResult(
            visibility=visibility,
            full=full,
            reduced=stages.reduced.compacted(),
            optimized=optimized,
            grid=cfg,
            path_set=stages.path_set,
            excluded_corners=list(ns.excluded_corners),
            constraints=report,
        )
