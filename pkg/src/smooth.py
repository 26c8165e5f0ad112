"""
로드맵 경로 스무딩 모듈입니다.
각 코너를 3차 베지어 곡선으로 블렌딩해 허용 이탈 거리 d_ad 안에서 방향 전환을 부드럽게 만듭니다.
"""

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
import shapely

from src.geometry import GEO_TOLERANCE, FreeSpace, clearance_many
from src.model import Roadmap, Robot

logger = logging.getLogger(__name__)

DEFAULT_REACH_FACTOR = 2.0
DEFAULT_SAMPLE_STEP = 0.05

# 베지어 조각 하나를 평가하는 매개변수 개수
_BEZIER_RESOLUTION = 65


@dataclass
class SmoothedPath:
    """
    스무딩된 경로.

    Attributes:
        source: 원본 노드 id 순서
        pieces: 3차 베지어 조각 목록 (각 (4, 2) 제어점 배열, 직선도 3차로 표현)
        samples: 호 길이 간격으로 샘플링한 점 (m, 2)
    """

    source: Tuple[int, ...]
    pieces: List[np.ndarray]
    samples: np.ndarray

    @property
    def length(self) -> float:
        d = np.diff(self.samples, axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    def blend_count(self) -> int:
        return sum(1 for piece in self.pieces if not _is_line(piece))


def _line_piece(p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    d = p1 - p0
    return np.array([p0, p0 + d / 3.0, p0 + 2.0 * d / 3.0, p1])


def _is_line(piece: np.ndarray) -> bool:
    # 코너 블렌드는 두 내부 제어점이 같은 점(코너 노드)에 놓입니다
    return not np.allclose(piece[1], piece[2])


def bezier_points(piece: np.ndarray, t: np.ndarray) -> np.ndarray:
    """3차 베지어 곡선을 매개변수 t 배열에서 평가합니다."""
    t = np.asarray(t, dtype=float)[:, None]
    s = 1.0 - t
    return (s ** 3) * piece[0] + 3 * (s ** 2) * t * piece[1] + 3 * s * (t ** 2) * piece[2] + (t ** 3) * piece[3]


def corner_blend(a: np.ndarray, v: np.ndarray, b: np.ndarray, d_ad: float,
                 reach_factor: float = DEFAULT_REACH_FACTOR) -> Optional[np.ndarray]:
    """
    코너 v에서 두 선분 v-a, v-b를 잇는 블렌드 곡선의 제어점 [v+L·u1, v, v, v+L·u2].

    L = min(reach_factor·d_ad, |va|/2, |vb|/2)이며, 곡선이 코너에 가장 가까이 가는 거리는
    L·cos(θ/2)/4, 다각선으로부터의 최대 이탈은 L·sin(θ)/2 이하입니다 (θ는 코너 내각).
    세 점이 일직선이면 None.
    """
    ua, ub = a - v, b - v
    la, lb = float(np.hypot(*ua)), float(np.hypot(*ub))
    u1, u2 = ua / la, ub / lb
    cross = u1[0] * u2[1] - u1[1] * u2[0]
    if abs(cross) <= GEO_TOLERANCE and float(u1 @ u2) < 0:
        return None
    reach = min(reach_factor * d_ad, la / 2.0, lb / 2.0)
    return np.array([v + reach * u1, v, v, v + reach * u2])


def _check_margin(d_ad: float, robot: Optional[Robot]) -> None:
    if not (math.isfinite(d_ad) and d_ad > 0):
        raise ValueError(f"허용 이탈 거리 d_ad는 양수여야 합니다: {d_ad}")
    if robot is not None and d_ad > robot.d_s + GEO_TOLERANCE:
        raise ValueError(f"d_ad({d_ad})가 안전 거리 d_s({robot.d_s})보다 큽니다")


def _pieces_along(points: Sequence[np.ndarray], corners: Sequence[Optional[np.ndarray]]) -> List[np.ndarray]:
    """다각선 꼭짓점과 내부 꼭짓점별 블렌드(없으면 None)로 조각 목록을 만듭니다."""
    pieces = []
    cursor = points[0]
    for v, blend in zip(points[1:-1], corners):
        target = v if blend is None else blend[0]
        if np.hypot(*(target - cursor)) > GEO_TOLERANCE:
            pieces.append(_line_piece(cursor, target))
        if blend is not None:
            pieces.append(blend)
            cursor = blend[3]
        else:
            cursor = v
    if np.hypot(*(points[-1] - cursor)) > GEO_TOLERANCE:
        pieces.append(_line_piece(cursor, points[-1]))
    return pieces


def sample_pieces(pieces: Sequence[np.ndarray], step: float = DEFAULT_SAMPLE_STEP) -> np.ndarray:
    """조각들을 이어 호 길이 step 간격으로 샘플링합니다. 첫 점과 끝 점은 정확히 포함됩니다."""
    dense = [pieces[0][0][None, :]]
    for piece in pieces:
        t = np.linspace(0.0, 1.0, 2 if _is_line(piece) else _BEZIER_RESOLUTION)
        dense.append(bezier_points(piece, t)[1:])
    dense = np.vstack(dense)

    d = np.diff(dense, axis=0)
    arc = np.concatenate([[0.0], np.cumsum(np.hypot(d[:, 0], d[:, 1]))])
    total = arc[-1]
    targets = np.arange(0.0, total, step)
    if total - targets[-1] > GEO_TOLERANCE:
        targets = np.append(targets, total)
    else:
        targets[-1] = total
    samples = np.column_stack([np.interp(targets, arc, dense[:, 0]), np.interp(targets, arc, dense[:, 1])])
    samples[0] = pieces[0][0]
    samples[-1] = pieces[-1][3]
    return samples


def smooth_path(path: Sequence[int], rm: Roadmap, d_ad: float, robot: Optional[Robot] = None,
                reach_factor: float = DEFAULT_REACH_FACTOR,
                sample_step: float = DEFAULT_SAMPLE_STEP) -> SmoothedPath:
    """
    로드맵 경로를 코너 블렌딩으로 스무딩합니다.

    Args:
        path: 노드 id 순서 (2개 이상)
        rm: 로드맵
        d_ad: 허용 이탈 거리 (m)
        robot: 주어지면 d_ad <= d_s 를 확인
        reach_factor: 블렌드 제어점 거리 = reach_factor·d_ad (선분 절반으로 제한)
        sample_step: 샘플 간격 (m)

    Raises:
        ValueError: 노드가 2개 미만, d_ad <= 0, d_ad > d_s
    """
    if len(path) < 2:
        raise ValueError(f"경로에는 최소 2개의 노드가 필요합니다: {list(path)}")
    _check_margin(d_ad, robot)
    points = [np.array(rm.point(n).as_tuple()) for n in path]
    corners = [corner_blend(a, v, b, d_ad, reach_factor) for a, v, b in zip(points, points[1:], points[2:])]
    pieces = _pieces_along(points, corners)
    return SmoothedPath(tuple(path), pieces, sample_pieces(pieces, sample_step))


def smooth_roadmap(rm: Roadmap, d_ad: float, robot: Optional[Robot] = None,
                   reach_factor: float = DEFAULT_REACH_FACTOR,
                   sample_step: float = DEFAULT_SAMPLE_STEP) -> List[SmoothedPath]:
    """
    모든 노드에서 인접 간선 쌍마다 블렌드 곡선을 만듭니다.

    각 곡선은 간선 a-v 의 중점에서 시작해 코너 v를 블렌딩하고 v-b 의 중점에서 끝나므로,
    전체 오버레이가 로드맵을 빈틈없이 덮습니다. 차수 d 노드는 C(d, 2)개의 곡선을 가집니다.
    """
    _check_margin(d_ad, robot)
    overlay = []
    for v in rm.nodes():
        pv = np.array(rm.point(v).as_tuple())
        for a, b in combinations(rm.neighbors(v), 2):
            pa = np.array(rm.point(a).as_tuple())
            pb = np.array(rm.point(b).as_tuple())
            blend = corner_blend(pa, pv, pb, d_ad, reach_factor)
            points = [(pa + pv) / 2.0, pv, (pv + pb) / 2.0]
            pieces = _pieces_along(points, [blend])
            overlay.append(SmoothedPath((a, v, b), pieces, sample_pieces(pieces, sample_step)))
    logger.debug(f"스무딩 오버레이: 곡선 {len(overlay)}개")
    return overlay


def max_deviation(sp: SmoothedPath, polyline: np.ndarray) -> float:
    """샘플들과 원본 다각선 사이 최대 거리"""
    line = shapely.linestrings(np.asarray(polyline, dtype=float))
    return float(shapely.distance(line, shapely.points(sp.samples)).max())


def path_min_clearance(sp: SmoothedPath, fs: FreeSpace) -> float:
    """샘플들의 최소 여유 거리 (장애물 경계까지 부호 있는 거리)"""
    return float(clearance_many(sp.samples, fs).min())
