"""
비교용 기준 로드맵 생성 모듈입니다.
4-연결 그리드, 8-연결 그리드, 무작위 샘플링으로 노드를 배치하고
들로네 삼각분할로 간선을 만든 뒤 Yen 경로로 사용되지 않은 요소를 제거합니다.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial import Delaunay, QhullError

from src.discretize import NodeSet, place_station_nodes, round_up_cm
from src.geometry import GEO_TOLERANCE, Point, Segment, clearance_many, segments_in_free_space
from src.metrics import MetricsReport, evaluate
from src.model import Environment, NodeKind, Roadmap, TransportMatrix
from src.optimize import PenaltyPolicy, compute_path_set, prune_unused

logger = logging.getLogger(__name__)

METHODS = ("grid4", "grid8", "random")

# 무작위 제안을 한 번에 만들어 여유 거리를 벡터로 계산하는 묶음 크기
_PROPOSAL_BATCH = 1024


@dataclass(frozen=True)
class BaselineConfig:
    """
    기준 로드맵 설정

    Attributes:
        method: grid4 | grid8 | random
        seed: 무작위 샘플링 시드 (random 전용)
        spacing: 격자 간격 또는 최소 노드 거리 (m)
        max_rejections: 연속 거절 횟수가 이 값에 이르면 무작위 샘플링 종료
    """

    method: str
    spacing: float
    seed: int = 0
    max_rejections: int = 10000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"알 수 없는 기준 방법입니다: {self.method} (가능: {', '.join(METHODS)})")
        if not self.spacing > 0:
            raise ValueError(f"간격은 양수여야 합니다: {self.spacing}")
        if self.max_rejections < 1:
            raise ValueError(f"max_rejections는 1 이상이어야 합니다: {self.max_rejections}")

    @classmethod
    def for_environment(cls, env: Environment, method: str, seed: int = 0,
                        max_rejections: int = 10000) -> "BaselineConfig":
        """grid4와 random은 d_v_min, grid8은 √2·d_ve_min을 cm 단위로 올린 간격을 씁니다."""
        c = env.constraints
        if method == "grid8":
            spacing = max(round_up_cm(math.sqrt(2) * c.d_ve_min), c.d_v_min)
        else:
            spacing = c.d_v_min
        return cls(method, spacing, seed, max_rejections)


def _lattice_nodes(ns: NodeSet, env: Environment, spacing: float) -> None:
    fs = env.free_space
    r = fs.clearance_radius
    minx, miny, maxx, maxy = fs.bounds()
    nx_ = max(0, math.floor((maxx - minx - 2 * r) / spacing + 1e-9) + 1)
    ny_ = max(0, math.floor((maxy - miny - 2 * r) / spacing + 1e-9) + 1)
    if nx_ == 0 or ny_ == 0:
        return
    xs = minx + r + spacing * np.arange(nx_)
    ys = miny + r + spacing * np.arange(ny_)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    xy = np.column_stack([gx.ravel(), gy.ravel()])
    free = clearance_many(xy, fs) >= r - GEO_TOLERANCE
    for (x, y), ok in zip(xy, free):
        if not ok:
            continue
        p = Point(float(x), float(y))
        if ns.is_clear(p):
            ns.add(p, NodeKind.GRID)


def _random_nodes(ns: NodeSet, env: Environment, seed: int, max_rejections: int) -> None:
    fs = env.free_space
    limit = fs.clearance_radius - GEO_TOLERANCE
    minx, miny, maxx, maxy = fs.bounds()
    rng = np.random.default_rng(seed)
    rejections = 0
    while rejections < max_rejections:
        batch = rng.uniform((minx, miny), (maxx, maxy), size=(_PROPOSAL_BATCH, 2))
        free = clearance_many(batch, fs) >= limit
        for (x, y), ok in zip(batch, free):
            p = Point(float(x), float(y))
            if ok and ns.is_clear(p):
                ns.add(p, NodeKind.GRID)
                rejections = 0
            else:
                rejections += 1
                if rejections >= max_rejections:
                    break


def generate_baseline_nodes(env: Environment, cfg: BaselineConfig) -> NodeSet:
    """
    기준 방법의 노드 집합. 상호작용 지점을 먼저 배치하고, 이들과 d_v_min을 어기는 격자점/샘플은 버립니다.
    """
    ns = place_station_nodes(env)
    if cfg.method == "random":
        _random_nodes(ns, env, cfg.seed, cfg.max_rejections)
    else:
        _lattice_nodes(ns, env, cfg.spacing)
    logger.info(f"기준 노드 배치 ({cfg.method}, 간격 {cfg.spacing} m): 노드 {len(ns)}개")
    return ns


def delaunay_edges(ns: NodeSet, env: Environment) -> Roadmap:
    """
    노드의 들로네 삼각분할 간선 중 자유 공간 안에 있는 것만 남깁니다.
    네 점이 한 원 위에 놓이는 퇴화는 점을 사전순으로 정렬해 입력해 결정적으로 처리합니다.
    노드가 3개 미만이거나 모두 일직선이면 정렬 순서대로 이웃한 점을 잇습니다.
    """
    rm = ns.to_roadmap()
    coords = ns.coords()
    n = len(coords)
    if n < 2:
        return rm
    order = np.lexsort((coords[:, 1], coords[:, 0]))

    pairs = set()
    if n >= 3:
        try:
            tri = Delaunay(coords[order])
            for simplex in tri.simplices:
                for a, b in ((0, 1), (1, 2), (0, 2)):
                    i, j = int(order[simplex[a]]), int(order[simplex[b]])
                    pairs.add((min(i, j), max(i, j)))
        except QhullError as e:
            logger.warning(f"들로네 삼각분할 실패, 정렬 순서로 연결합니다: {e}")
    if not pairs:
        for i, j in zip(order, order[1:]):
            pairs.add((min(int(i), int(j)), max(int(i), int(j))))

    pairs = sorted(pairs)
    segments = [Segment(ns.points[i], ns.points[j]) for i, j in pairs]
    free = segments_in_free_space(segments, env.free_space)
    for (i, j), ok in zip(pairs, free):
        if ok:
            rm.add_edge(i, j)
    logger.info(f"들로네 간선 {rm.edge_count}개 (삼각분할 간선 {len(pairs)}개)")
    return rm


def generate_baseline(env: Environment, demand: TransportMatrix, cfg: BaselineConfig,
                      policy: Optional[PenaltyPolicy] = None) -> Roadmap:
    """
    노드 -> 들로네 간선 -> Yen 누적 -> 가지치기. 평면화와 정리는 하지 않습니다.

    Raises:
        DisconnectedDemandError: 수요 쌍에 경로가 없을 때
    """
    policy = policy or PenaltyPolicy()
    ns = generate_baseline_nodes(env, cfg)
    full = delaunay_edges(ns, env)
    ps = compute_path_set(full, demand, ns.station_ids, policy)
    return prune_unused(full, ps).compacted()


@dataclass
class RandomBaselineSummary:
    """여러 시드에 걸친 무작위 기준 결과"""

    seeds: List[int]
    reports: List[MetricsReport]
    mean: MetricsReport
    node_count_cv: float


def random_baseline_runs(env: Environment, demand: TransportMatrix, seeds: Sequence[int] = range(10),
                         policy: Optional[PenaltyPolicy] = None,
                         max_rejections: int = 10000) -> RandomBaselineSummary:
    """
    무작위 기준을 여러 시드로 반복해 평균 지표와 노드 수 변동 계수를 계산합니다.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("시드가 하나 이상 필요합니다")
    reports = []
    for seed in seeds:
        cfg = BaselineConfig.for_environment(env, "random", seed, max_rejections)
        rm = generate_baseline(env, demand, cfg, policy)
        reports.append(evaluate(rm, demand, env))
    counts = np.array([r.n_nodes for r in reports], dtype=float)
    cv = float(counts.std() / counts.mean()) if counts.mean() > 0 else 0.0
    logger.info(f"무작위 기준 {len(seeds)}회: 평균 노드 {counts.mean():.1f}개, 변동 계수 {cv:.3f}")
    return RandomBaselineSummary(seeds, reports, MetricsReport.mean(reports), cv)
