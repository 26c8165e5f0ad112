"""
전체 간선 구성 모듈입니다.
자유 공간 안에 있고 끝점이 아닌 모든 노드와 d_ve_min 이상 떨어진 직선 간선을 모두 연결합니다.
결과는 교차 간선을 포함할 수 있습니다.
"""

import logging
import math
from itertools import combinations
from typing import Collection, Optional

import numpy as np
from scipy.spatial import cKDTree

from src.discretize import NodeSet, default_grid_resolution
from src.geometry import GEO_TOLERANCE, Segment, segments_in_free_space
from src.model import Environment, Roadmap

logger = logging.getLogger(__name__)

# 후보 반경 = 이 값 x d_g
DEFAULT_RADIUS_FACTOR = 3.0


def point_segment_distances(a: np.ndarray, b: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """선분 a-b에서 여러 점까지의 거리 (끝점에서 투영을 자름)"""
    d = b - a
    denom = float(d @ d)
    t = np.clip(((pts - a) @ d) / denom, 0.0, 1.0)
    foot = a + t[:, None] * d
    return np.hypot(pts[:, 0] - foot[:, 0], pts[:, 1] - foot[:, 1])


def segment_clear_of_nodes(a: np.ndarray, b: np.ndarray, coords: np.ndarray, tree: cKDTree,
                           exclude: Collection[int], min_distance: float) -> bool:
    """
    선분 a-b가 exclude를 제외한 모든 노드와 min_distance 이상 떨어져 있는지 확인합니다.
    coords/tree는 같은 노드 배열로 만든 것이어야 합니다.
    """
    mid = (a + b) / 2.0
    reach = float(np.hypot(*(b - a))) / 2.0 + min_distance
    near = [i for i in tree.query_ball_point(mid, reach) if i not in exclude]
    if not near:
        return True
    distances = point_segment_distances(a, b, coords[near])
    return bool((distances >= min_distance - GEO_TOLERANCE).all())


def build_full_edges(ns: NodeSet, env: Environment, candidate_radius: Optional[float] = None) -> Roadmap:
    """
    노드 집합에서 전체 로드맵을 만듭니다 (사용 횟수 0).

    Args:
        ns: 배치된 노드 집합
        env: 환경
        candidate_radius: 후보 쌍 탐색 반경. None이면 3·d_g, math.inf이면 모든 쌍

    Returns:
        노드 id가 ns 배치 순서와 같은 Roadmap
    """
    if candidate_radius is None:
        candidate_radius = DEFAULT_RADIUS_FACTOR * default_grid_resolution(env)
    rm = ns.to_roadmap()
    coords = ns.coords()
    n = len(coords)
    if n < 2:
        return rm

    if math.isinf(candidate_radius):
        pairs = np.array(list(combinations(range(n), 2)), dtype=int).reshape(-1, 2)
    else:
        tree = cKDTree(coords)
        pairs = tree.query_pairs(r=candidate_radius, output_type="ndarray")
        pairs = np.sort(pairs, axis=1)
    if len(pairs) == 0:
        return rm
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]

    segments = [Segment(ns.points[i], ns.points[j]) for i, j in pairs]
    free = segments_in_free_space(segments, env.free_space)

    d_ve_min = env.constraints.d_ve_min
    tree = cKDTree(coords)
    added = 0
    for (i, j), ok in zip(pairs, free):
        if not ok:
            continue
        if segment_clear_of_nodes(coords[i], coords[j], coords, tree, (i, j), d_ve_min):
            rm.add_edge(int(i), int(j))
            added += 1

    logger.info(f"전체 간선 {added}개 구성 (후보 쌍 {len(pairs)}개, 자유 공간 통과 {int(free.sum())}개)")
    return rm
