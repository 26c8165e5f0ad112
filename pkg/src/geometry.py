"""
계산 기하 커널 모듈입니다.
자유 공간(C_free)을 오프셋 폴리곤으로 만들지 않고 거리 질의(여유 거리 >= r)로 표현하며,
점/선분 여유 거리, 선분 교차 판정, 볼록 코너 후보와 코너 원호 표본 추출, 가시성 그래프를 제공합니다.
최단 경로 길이의 하한이 필요한 평가용으로만 원호를 내접 현으로 근사한 자유 영역을 만듭니다.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import List, Sequence, Tuple

import networkx as nx
import numpy as np
import shapely
from shapely.geometry import GeometryCollection, LinearRing
from shapely.geometry import Polygon as ShapelyPolygon

# 방향/접촉 판정에 사용하는 전역 허용 오차 (미터)
GEO_TOLERANCE = 1e-9

# 코너 후보를 여유 반경보다 1 mm 더 밀어내 C_free 안쪽에 두기 위한 값
CORNER_EPSILON = 1e-3


@dataclass(frozen=True)
class Point:
    """평면 위의 점 (미터 단위)"""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"좌표는 유한한 값이어야 합니다: ({self.x}, {self.y})")

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Segment:
    """두 점을 잇는 직선 선분"""

    a: Point
    b: Point

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"선분의 두 끝점이 같습니다: {self.a}")

    @property
    def length(self) -> float:
        return self.a.distance_to(self.b)

    @property
    def midpoint(self) -> Point:
        return Point((self.a.x + self.b.x) / 2.0, (self.a.y + self.b.y) / 2.0)


@dataclass(frozen=True)
class Polygon:
    """
    단순 다각형. 꼭짓점은 항상 반시계 방향으로 정규화되어 저장됩니다.
    생성은 from_coords()를 사용하세요.
    """

    vertices: Tuple[Point, ...]

    @classmethod
    def from_coords(cls, coords: Sequence[Sequence[float]]) -> "Polygon":
        """
        좌표 목록으로 다각형을 만들고 방향을 반시계로 맞춥니다.

        Args:
            coords: [[x, y], ...] 형태의 꼭짓점 목록 (닫는 점은 있어도 됨)

        Returns:
            검증된 Polygon

        Raises:
            ValueError: 꼭짓점 부족, 자기 교차, 면적 0
        """
        points = [Point(float(c[0]), float(c[1])) for c in coords]
        if len(points) > 1 and points[0] == points[-1]:
            points = points[:-1]
        if len(points) < 3:
            raise ValueError(f"다각형에는 최소 3개의 꼭짓점이 필요합니다 (입력: {len(points)}개)")

        ring = LinearRing([p.as_tuple() for p in points])
        if not ring.is_simple:
            raise ValueError("자기 교차하는 다각형입니다")
        area = _signed_area(points)
        if abs(area) <= GEO_TOLERANCE:
            raise ValueError("면적이 0인 다각형입니다")
        if area < 0:
            points.reverse()
        return cls(tuple(points))

    @cached_property
    def shape(self) -> ShapelyPolygon:
        return ShapelyPolygon([p.as_tuple() for p in self.vertices])

    @cached_property
    def ring(self) -> LinearRing:
        return LinearRing([p.as_tuple() for p in self.vertices])

    def bounds(self) -> Tuple[float, float, float, float]:
        return self.shape.bounds

    def coords(self) -> List[List[float]]:
        return [[p.x, p.y] for p in self.vertices]


def _signed_area(points: Sequence[Point]) -> float:
    area = 0.0
    for i, p in enumerate(points):
        q = points[(i + 1) % len(points)]
        area += p.x * q.y - q.x * p.y
    return area / 2.0


@dataclass(frozen=True)
class FreeSpace:
    """
    확장된 자유 공간의 암시적 표현.
    경계 다각형, 구멍(장애물 + 장애물 스테이션) 목록, 여유 반경 r = r_rob + d_s 로 정의됩니다.
    """

    boundary: Polygon
    holes: Tuple[Polygon, ...]
    clearance_radius: float

    def __post_init__(self):
        if not self.clearance_radius > 0:
            raise ValueError(f"여유 반경은 양수여야 합니다: {self.clearance_radius}")
        for index, hole in enumerate(self.holes):
            if not self.boundary.shape.covers(hole.shape):
                raise ValueError(f"장애물 {index}이(가) 외곽 경계 밖으로 벗어납니다")

    @cached_property
    def obstacle_geometry(self) -> GeometryCollection:
        # 경계선과 구멍 내부까지의 무부호 최소 거리를 한 번에 구하기 위한 묶음
        return GeometryCollection([self.boundary.ring] + [hole.shape for hole in self.holes])

    @cached_property
    def _hole_rings(self) -> np.ndarray:
        return np.array([hole.ring for hole in self.holes], dtype=object)

    @cached_property
    def _hole_shapes(self) -> np.ndarray:
        return np.array([hole.shape for hole in self.holes], dtype=object)

    def bounds(self) -> Tuple[float, float, float, float]:
        return self.boundary.bounds()


def clearance(p: Point, fs: FreeSpace) -> float:
    """
    점의 부호 있는 여유 거리를 계산합니다.

    Args:
        p: 질의 점
        fs: 자유 공간

    Returns:
        경계선과 모든 구멍까지 거리 중 최솟값. 경계 밖이거나 구멍 안이면 음수.
    """
    return float(clearance_many(np.array([[p.x, p.y]]), fs)[0])


def clearance_many(xy: np.ndarray, fs: FreeSpace) -> np.ndarray:
    """
    여러 점의 부호 있는 여유 거리를 한 번에 계산합니다 (shapely 벡터 연산).

    Args:
        xy: (n, 2) 좌표 배열
        fs: 자유 공간

    Returns:
        (n,) 여유 거리 배열
    """
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    if len(xy) == 0:
        return np.zeros(0)
    pts = shapely.points(xy)

    outer = shapely.distance(fs.boundary.ring, pts)
    inside = shapely.covers(fs.boundary.shape, pts)
    values = np.where(inside, outer, -outer)

    if fs.holes:
        rings = fs._hole_rings[:, None]
        shapes = fs._hole_shapes[:, None]
        hole_dist = shapely.distance(rings, pts[None, :])
        in_hole = shapely.covers(shapes, pts[None, :])
        signed = np.where(in_hole, -hole_dist, hole_dist)
        values = np.minimum(values, signed.min(axis=0))
    return values


def in_free_space(p: Point, fs: FreeSpace) -> bool:
    """clearance(p) >= r 이면 True (경계 포함 비교)"""
    return clearance(p, fs) >= fs.clearance_radius - GEO_TOLERANCE


def segment_in_free_space(s: Segment, fs: FreeSpace) -> bool:
    """
    선분 전체가 자유 공간 안에 있는지 정확히 판정합니다 (샘플링 없음).

    한 끝점이 자유 공간에 있고 선분이 경계선과 모든 구멍으로부터 r 이상 떨어져 있으면
    선분은 어떤 경계도 넘지 않으므로 전체가 자유 공간에 포함됩니다.
    """
    return bool(segments_in_free_space([s], fs)[0])


def segments_in_free_space(segments: Sequence[Segment], fs: FreeSpace) -> np.ndarray:
    """segment_in_free_space의 벡터 버전"""
    if not segments:
        return np.zeros(0, dtype=bool)
    starts = np.array([[s.a.x, s.a.y] for s in segments])
    ends = np.array([[s.b.x, s.b.y] for s in segments])
    lines = shapely.linestrings(np.stack([starts, ends], axis=1))
    limit = fs.clearance_radius - GEO_TOLERANCE
    line_ok = shapely.distance(fs.obstacle_geometry, lines) >= limit
    start_ok = clearance_many(starts, fs) >= limit
    return line_ok & start_ok


def segment_point_distance(s: Segment, p: Point) -> float:
    """선분 위 가장 가까운 점까지의 유클리드 거리 (끝점에서 투영을 자름)"""
    dx = s.b.x - s.a.x
    dy = s.b.y - s.a.y
    t = ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / (dx * dx + dy * dy)
    t = min(1.0, max(0.0, t))
    return math.hypot(s.a.x + t * dx - p.x, s.a.y + t * dy - p.y)


def _orientation(p: Point, q: Point, r: Point) -> int:
    value = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
    if abs(value) <= GEO_TOLERANCE:
        return 0
    return 1 if value > 0 else -1


def _on_segment(s: Segment, p: Point) -> bool:
    # p가 s와 공선이라는 전제에서 바운딩 박스 안에 있는지 확인
    return (min(s.a.x, s.b.x) - GEO_TOLERANCE <= p.x <= max(s.a.x, s.b.x) + GEO_TOLERANCE
            and min(s.a.y, s.b.y) - GEO_TOLERANCE <= p.y <= max(s.a.y, s.b.y) + GEO_TOLERANCE)


def _same_point(p: Point, q: Point) -> bool:
    return abs(p.x - q.x) <= GEO_TOLERANCE and abs(p.y - q.y) <= GEO_TOLERANCE


def _collinear_overlap(s1: Segment, s2: Segment) -> float:
    dx = s1.b.x - s1.a.x
    dy = s1.b.y - s1.a.y
    norm = math.hypot(dx, dy)

    def project(p: Point) -> float:
        return ((p.x - s1.a.x) * dx + (p.y - s1.a.y) * dy) / norm

    lo1, hi1 = 0.0, norm
    t1, t2 = project(s2.a), project(s2.b)
    lo2, hi2 = min(t1, t2), max(t1, t2)
    return min(hi1, hi2) - max(lo1, lo2)


def segments_cross(s1: Segment, s2: Segment) -> bool:
    """
    두 선분의 내부가 교차하는지 판정합니다.

    끝점 공유만으로는 교차가 아니며, 공선 상의 겹침은 교차로 봅니다.
    한 선분의 끝점이 다른 선분 내부에 닿는 경우도 교차입니다.
    """
    o1 = _orientation(s1.a, s1.b, s2.a)
    o2 = _orientation(s1.a, s1.b, s2.b)
    o3 = _orientation(s2.a, s2.b, s1.a)
    o4 = _orientation(s2.a, s2.b, s1.b)

    if o1 == 0 and o2 == 0 and o3 == 0 and o4 == 0:
        return _collinear_overlap(s1, s2) > GEO_TOLERANCE

    shared = any(_same_point(p, q) for p in (s1.a, s1.b) for q in (s2.a, s2.b))
    if shared:
        return False

    if o1 * o2 < 0 and o3 * o4 < 0:
        return True

    # T자 접촉
    if o1 == 0 and _on_segment(s1, s2.a):
        return True
    if o2 == 0 and _on_segment(s1, s2.b):
        return True
    if o3 == 0 and _on_segment(s2, s1.a):
        return True
    if o4 == 0 and _on_segment(s2, s1.b):
        return True
    return False


def _corner_offsets(polygon: Polygon, want_convex: bool, distance: float) -> List[Tuple[Point, Point]]:
    """
    다각형 꼭짓점 중 조건에 맞는 것을 외각 이등분선 방향으로 distance 만큼 밀어낸 (꼭짓점, 점) 목록.
    want_convex=True 이면 볼록 꼭짓점(구멍), False 이면 오목 꼭짓점(외곽 경계)을 고릅니다.
    """
    result = []
    vertices = polygon.vertices
    count = len(vertices)
    for i, v in enumerate(vertices):
        prev = vertices[i - 1]
        nxt = vertices[(i + 1) % count]
        turn = (v.x - prev.x) * (nxt.y - v.y) - (v.y - prev.y) * (nxt.x - v.x)
        if abs(turn) <= GEO_TOLERANCE:
            continue
        if (turn > 0) != want_convex:
            continue

        ax, ay = prev.x - v.x, prev.y - v.y
        bx, by = nxt.x - v.x, nxt.y - v.y
        la, lb = math.hypot(ax, ay), math.hypot(bx, by)
        ax, ay, bx, by = ax / la, ay / la, bx / lb, by / lb
        dx, dy = -(ax + bx), -(ay + by)
        norm = math.hypot(dx, dy)
        if norm <= GEO_TOLERANCE:
            continue
        result.append((v, Point(v.x + dx / norm * distance, v.y + dy / norm * distance)))
    return result


def convex_corners(fs: FreeSpace) -> List[Tuple[Point, Point]]:
    """
    자유 공간의 볼록 코너를 (장애물 꼭짓점, 후보점) 쌍으로 추출합니다.

    구멍의 볼록 꼭짓점과 외곽 경계의 오목 꼭짓점을 외각 이등분선 방향으로 밀어,
    꼭짓점으로부터 clearance_radius + 1 mm 떨어진 점이며, 자유 공간 밖의 후보는 버립니다.
    순서는 구멍(입력 순서) 다음 외곽 경계이며, 이 순서가 후보 id가 됩니다.
    """
    offset = fs.clearance_radius + CORNER_EPSILON
    raw: List[Tuple[Point, Point]] = []
    for hole in fs.holes:
        raw.extend(_corner_offsets(hole, want_convex=True, distance=offset))
    raw.extend(_corner_offsets(fs.boundary, want_convex=False, distance=offset))
    return _keep_free(raw, fs)


def convex_corner_candidates(fs: FreeSpace) -> List[Point]:
    """자유 공간의 볼록 코너 후보점 목록 (convex_corners의 후보점만)"""
    return [p for _, p in convex_corners(fs)]


def _keep_free(items: List[Tuple[Point, Point]], fs: FreeSpace) -> List[Tuple[Point, Point]]:
    if not items:
        return []
    values = clearance_many(np.array([p.as_tuple() for _, p in items]), fs)
    return [item for item, value in zip(items, values) if value >= fs.clearance_radius - GEO_TOLERANCE]


def corner_arc_samples(fs: FreeSpace, max_step: float = math.pi / 12.0) -> List[Tuple[Point, Point]]:
    """
    장애물 코너를 감싸는 여유 원호의 외접 다각형 꼭짓점을 추출합니다.

    각 코너에서 두 변의 법선 사이 외각을 max_step 이하의 같은 각도로 나누고,
    반지름 (r + 1 mm) / cos(step / 2) 위에 점을 둡니다. 이웃한 두 점을 잇는 현은
    꼭짓점으로부터 r + 1 mm 떨어지므로 이 점들을 지나는 가시성 경로는 C_free 안의
    최단 경로를 원호 오차 이내로 따라갑니다.
    반환값은 (장애물 꼭짓점, 표본점) 쌍이며 자유 공간 밖의 표본은 버립니다.
    """
    offset = fs.clearance_radius + CORNER_EPSILON
    # 자유 공간이 진행 방향 오른쪽에 오도록 외곽 경계는 뒤집음
    rings = [hole.vertices for hole in fs.holes] + [tuple(reversed(fs.boundary.vertices))]
    raw: List[Tuple[Point, Point]] = []
    for vertices in rings:
        count = len(vertices)
        for i, v in enumerate(vertices):
            prev = vertices[i - 1]
            nxt = vertices[(i + 1) % count]
            e1x, e1y = v.x - prev.x, v.y - prev.y
            e2x, e2y = nxt.x - v.x, nxt.y - v.y
            cross = e1x * e2y - e1y * e2x
            if cross <= GEO_TOLERANCE:
                continue
            theta = math.atan2(cross, e1x * e2x + e1y * e2y)
            start = math.atan2(-e1x, e1y)
            steps = max(1, math.ceil(theta / max_step - GEO_TOLERANCE))
            step = theta / steps
            radius = offset / math.cos(step / 2.0)
            for k in range(steps + 1):
                phi = start + step * k
                raw.append((v, Point(v.x + radius * math.cos(phi), v.y + radius * math.sin(phi))))
    return _keep_free(raw, fs)


def visibility_graph(nodes: Sequence[Point], fs: FreeSpace) -> nx.Graph:
    """
    자유 공간 위의 가시성 그래프를 만듭니다.

    Args:
        nodes: 자유 공간 안의 점 목록 (그래프 노드 id는 목록 인덱스)
        fs: 자유 공간

    Returns:
        간선 가중치 'weight'가 유클리드 길이인 networkx 무향 그래프
    """
    graph = nx.Graph()
    for index, p in enumerate(nodes):
        graph.add_node(index, pos=p)

    pairs = [(i, j) for i, j in combinations(range(len(nodes)), 2) if nodes[i] != nodes[j]]
    if not pairs:
        return graph
    segments = [Segment(nodes[i], nodes[j]) for i, j in pairs]
    visible = segments_in_free_space(segments, fs)
    for (i, j), seg, ok in zip(pairs, segments, visible):
        if ok:
            graph.add_edge(i, j, weight=seg.length)
    return graph


def corner_visibility_graph(points: Sequence[Point], fs: FreeSpace) -> nx.Graph:
    """
    주어진 점과 모든 코너 후보, 코너 원호 표본을 잇는 가시성 그래프를 만듭니다.

    노드 0..len(points)-1 은 주어진 점이고, 나머지 노드의 'corner' 속성은 그 점이 감싸는
    장애물 꼭짓점입니다 (주어진 점은 None). 이 그래프의 최단 경로는 C_free 안의
    유클리드 최단 경로를 위에서 근사합니다.
    """
    extra = convex_corners(fs) + corner_arc_samples(fs)
    nodes = list(points) + [p for _, p in extra]
    graph = visibility_graph(nodes, fs)
    for index in range(len(points)):
        graph.nodes[index]["corner"] = None
    for offset, (vertex, _) in enumerate(extra):
        graph.nodes[len(points) + offset]["corner"] = vertex
    return graph


def relaxed_free_region(fs: FreeSpace, quad_segs: int = 6) -> shapely.Geometry:
    """
    확장 장애물의 원호를 내접 현으로 근사한 자유 영역 (정확한 C_free 를 포함).

    외곽 경계선과 구멍을 shapely buffer 로 r 만큼 넓혀 경계 다각형에서 뺍니다. buffer 의
    원호 꼭짓점은 반지름 r 원 위에 놓이므로 근사 장애물은 실제 확장 장애물보다 작습니다.
    """
    r = fs.clearance_radius
    grown = [shapely.buffer(fs.boundary.ring, r, quad_segs=quad_segs)]
    grown += [shapely.buffer(hole.shape, r, quad_segs=quad_segs) for hole in fs.holes]
    return shapely.difference(fs.boundary.shape, shapely.union_all(grown))


def geodesic_graph(points: Sequence[Point], fs: FreeSpace, quad_segs: int = 6) -> nx.Graph:
    """
    relaxed_free_region 위의 가시성 그래프. 노드 0..len(points)-1 이 주어진 점이고 나머지는
    영역의 꼭짓점입니다.

    영역이 C_free 를 포함하므로 이 그래프의 최단 경로 길이는 C_free 안의 어떤 경로 길이보다도
    길지 않습니다 (원호 근사 오차만큼 짧음).
    """
    region = relaxed_free_region(fs, quad_segs)
    # 경계 위를 지나는 현을 받아들이기 위한 여유
    covering = shapely.buffer(region, 1e-6)
    shapely.prepare(covering)

    seen = set(points)
    nodes = list(points)
    for polygon in shapely.get_parts(region):
        for ring in [polygon.exterior, *polygon.interiors]:
            for x, y in list(ring.coords)[:-1]:
                p = Point(float(x), float(y))
                if p not in seen:
                    seen.add(p)
                    nodes.append(p)

    graph = nx.Graph()
    for index, p in enumerate(nodes):
        graph.add_node(index, pos=p)
    pairs = list(combinations(range(len(nodes)), 2))
    if not pairs:
        return graph
    coords = np.array([[p.x, p.y] for p in nodes])
    index = np.array(pairs)
    lines = shapely.linestrings(np.stack([coords[index[:, 0]], coords[index[:, 1]]], axis=1))
    visible = shapely.covers(covering, lines)
    for (i, j), ok in zip(pairs, visible):
        if ok:
            graph.add_edge(i, j, weight=nodes[i].distance_to(nodes[j]))
    return graph
