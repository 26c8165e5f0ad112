"""
환경, 로봇, 운송 수요, 로드맵 데이터 모델 모듈입니다.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from src.geometry import GEO_TOLERANCE, FreeSpace, Point, Polygon, Segment, corner_visibility_graph, geodesic_graph


class RoadmapInputError(ValueError):
    """입력 문서나 로드맵 파일이 유효하지 않을 때 발생합니다 (CLI 종료 코드 2)."""


class DisconnectedDemandError(RuntimeError):
    """운송 수요가 있는 지점 쌍이 연결되어 있지 않을 때 발생합니다 (CLI 종료 코드 3)."""

    def __init__(self, pair: Tuple, message: Optional[str] = None):
        self.pair = pair
        super().__init__(message or f"운송 수요 쌍 {pair[0]} -> {pair[1]} 사이에 경로가 없습니다")


@dataclass(frozen=True)
class Robot:
    """
    동종 로봇 플릿의 치수

    Attributes:
        r_rob: 회전 반경 (m)
        w_rob: 폭 (m)
        d_s: 안전 거리 (m)
    """

    r_rob: float
    w_rob: float
    d_s: float

    def __post_init__(self):
        for name in ("r_rob", "w_rob", "d_s"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"로봇 파라미터 {name}는 양수여야 합니다: {value}")
        if self.w_rob > 2 * self.r_rob + GEO_TOLERANCE:
            raise ValueError(f"로봇 폭({self.w_rob})이 회전 지름({2 * self.r_rob})보다 큽니다")

    @property
    def clearance_radius(self) -> float:
        return self.r_rob + self.d_s

    @property
    def constraints(self) -> "Constraints":
        return Constraints(self)


@dataclass(frozen=True)
class Constraints:
    """로봇 치수에서 유도되는 최소 노드 간 거리와 최소 노드-간선 거리"""

    robot: Robot
    d_v_min: float = field(init=False)
    d_ve_min: float = field(init=False)

    def __post_init__(self):
        r = self.robot
        object.__setattr__(self, "d_v_min", 2 * (r.r_rob + r.d_s))
        object.__setattr__(self, "d_ve_min", r.r_rob + r.w_rob / 2 + 2 * r.d_s)


@dataclass(frozen=True)
class Station:
    """상호작용 지점을 가진 스테이션. is_obstacle이면 footprint가 장애물이 됩니다."""

    id: str
    interaction_points: Tuple[Point, ...]
    footprint: Optional[Polygon] = None
    is_obstacle: bool = False

    def __post_init__(self):
        if not self.interaction_points:
            raise ValueError(f"스테이션 {self.id}에 상호작용 지점이 없습니다")
        if self.is_obstacle and self.footprint is None:
            raise ValueError(f"장애물 스테이션 {self.id}에 footprint가 없습니다")

    def interaction_point_ids(self) -> List[str]:
        if len(self.interaction_points) == 1:
            return [self.id]
        return [f"{self.id}.{k + 1}" for k in range(len(self.interaction_points))]


@dataclass(frozen=True)
class Environment:
    """외곽 경계, 장애물, 스테이션, 로봇으로 이루어진 월드 모델"""

    boundary: Polygon
    obstacles: Tuple[Polygon, ...]
    stations: Tuple[Station, ...]
    robot: Robot

    @cached_property
    def free_space(self) -> FreeSpace:
        holes = list(self.obstacles)
        holes.extend(s.footprint for s in self.stations if s.is_obstacle)
        return FreeSpace(self.boundary, tuple(holes), self.robot.clearance_radius)

    @cached_property
    def constraints(self) -> Constraints:
        return self.robot.constraints

    @cached_property
    def interaction_points(self) -> List[Point]:
        return [p for s in self.stations for p in s.interaction_points]

    @cached_property
    def interaction_point_ids(self) -> List[str]:
        return [ip for s in self.stations for ip in s.interaction_point_ids()]

    @cached_property
    def corner_graph(self) -> nx.Graph:
        # 상호작용 지점 + 코너 후보 + 코너 원호 표본 가시성 그래프 (노드 0..n_ip-1 이 상호작용 지점)
        return corner_visibility_graph(self.interaction_points, self.free_space)

    @cached_property
    def geodesic_graph(self) -> nx.Graph:
        # 자유 공간 최단 경로 길이의 하한용 (노드 0..n_ip-1 이 상호작용 지점)
        return geodesic_graph(self.interaction_points, self.free_space)


@dataclass(eq=False)
class TransportMatrix:
    """
    상호작용 지점 간 단위 시간당 운송 작업 수 T (n x n, 스테이션 순서로 인덱싱)
    """

    order: Tuple[str, ...]
    T: np.ndarray

    def __post_init__(self):
        self.T = np.asarray(self.T, dtype=np.int64)
        n = len(self.order)
        if self.T.shape != (n, n):
            raise RoadmapInputError(f"운송 행렬 크기 {self.T.shape}가 지점 수 {n}과 맞지 않습니다")
        if (self.T < 0).any():
            raise RoadmapInputError("운송 행렬에 음수 항목이 있습니다")
        if np.diag(self.T).any():
            raise RoadmapInputError("운송 행렬의 대각 항목은 0이어야 합니다")

    @property
    def size(self) -> int:
        return len(self.order)

    def demand_pairs(self) -> List[Tuple[int, int]]:
        """T_ij > 0 인 방향 쌍 목록 (행 우선 순서)"""
        rows, cols = np.nonzero(self.T)
        return [(int(i), int(j)) for i, j in zip(rows, cols)]

    def unordered_pairs(self) -> List[Tuple[int, int]]:
        """T_ij > 0 또는 T_ji > 0 인 무향 쌍 목록 (i < j)"""
        return sorted({(min(i, j), max(i, j)) for i, j in self.demand_pairs()})

    def scaled(self, factor: float) -> "TransportMatrix":
        """시간 단위 조정: T에 factor를 곱해 반올림한 새 행렬"""
        if factor <= 0:
            raise ValueError(f"수요 배율은 양수여야 합니다: {factor}")
        if factor == 1.0:
            return TransportMatrix(self.order, self.T.copy())
        return TransportMatrix(self.order, np.rint(self.T * factor).astype(np.int64))

    def __eq__(self, other):
        if not isinstance(other, TransportMatrix):
            return NotImplemented
        return self.order == other.order and np.array_equal(self.T, other.T)


class NodeKind(str, Enum):
    STATION = "station"
    CORNER = "corner"
    GRID = "grid"
    REINSERTED = "reinserted"


def edge_key(a: int, b: int) -> Tuple[int, int]:
    return (a, b) if a < b else (b, a)


class Roadmap:
    """
    로드맵 그래프 G = (V, E).
    노드는 좌표와 종류 태그를, 간선은 길이와 사용 횟수 u(e)를 가집니다.
    내부 저장소로 networkx 무향 그래프를 사용합니다.
    """

    def __init__(self):
        self.graph = nx.Graph()
        self._next_id = 0

    # --- 노드 ---------------------------------------------------------------

    def add_node(self, point: Point, kind: NodeKind, node_id: Optional[int] = None) -> int:
        if node_id is None:
            node_id = self._next_id
        if node_id in self.graph:
            raise ValueError(f"이미 존재하는 노드 id입니다: {node_id}")
        self.graph.add_node(node_id, point=point, kind=NodeKind(kind))
        self._next_id = max(self._next_id, node_id + 1)
        return node_id

    def remove_node(self, node_id: int) -> None:
        self.graph.remove_node(node_id)

    def nodes(self) -> List[int]:
        return sorted(self.graph.nodes)

    def point(self, node_id: int) -> Point:
        return self.graph.nodes[node_id]["point"]

    def kind(self, node_id: int) -> NodeKind:
        return self.graph.nodes[node_id]["kind"]

    def station_nodes(self) -> List[int]:
        return [n for n in self.nodes() if self.kind(n) == NodeKind.STATION]

    def degree(self, node_id: int) -> int:
        return self.graph.degree[node_id]

    def neighbors(self, node_id: int) -> List[int]:
        return sorted(self.graph.neighbors(node_id))

    @property
    def node_count(self) -> int:
        return self.graph.number_of_nodes()

    # --- 간선 ---------------------------------------------------------------

    def add_edge(self, a: int, b: int, usage: int = 0) -> None:
        if a == b:
            raise ValueError(f"자기 루프 간선은 허용되지 않습니다: {a}")
        if a not in self.graph or b not in self.graph:
            raise ValueError(f"존재하지 않는 노드를 잇는 간선입니다: ({a}, {b})")
        if self.graph.has_edge(a, b):
            raise ValueError(f"중복 간선입니다: ({a}, {b})")
        length = self.point(a).distance_to(self.point(b))
        self.graph.add_edge(a, b, length=length, usage=int(usage))

    def remove_edge(self, a: int, b: int) -> None:
        self.graph.remove_edge(a, b)

    def has_edge(self, a: int, b: int) -> bool:
        return self.graph.has_edge(a, b)

    def edges(self) -> List[Tuple[int, int]]:
        return sorted(edge_key(a, b) for a, b in self.graph.edges)

    def usage(self, a: int, b: int) -> int:
        return self.graph.edges[a, b]["usage"]

    def set_usage(self, a: int, b: int, usage: int) -> None:
        self.graph.edges[a, b]["usage"] = int(usage)

    def length(self, a: int, b: int) -> float:
        return self.graph.edges[a, b]["length"]

    def segment(self, a: int, b: int) -> Segment:
        return Segment(self.point(a), self.point(b))

    @property
    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    # --- 변환 ---------------------------------------------------------------

    def copy(self) -> "Roadmap":
        other = Roadmap()
        other.graph = self.graph.copy()
        other._next_id = self._next_id
        return other

    def compacted(self) -> "Roadmap":
        """노드 id를 기존 순서를 유지한 채 0..n-1로 다시 매깁니다."""
        mapping = {old: new for new, old in enumerate(self.nodes())}
        other = Roadmap()
        for old, new in mapping.items():
            other.add_node(self.point(old), self.kind(old), new)
        for a, b in self.edges():
            other.add_edge(mapping[a], mapping[b], self.usage(a, b))
        return other

    def points_array(self, node_ids: Optional[Sequence[int]] = None) -> np.ndarray:
        ids = self.nodes() if node_ids is None else node_ids
        return np.array([self.point(n).as_tuple() for n in ids], dtype=float).reshape(-1, 2)

    def locate_interaction_points(self, env: Environment) -> List[int]:
        """
        환경의 상호작용 지점(스테이션 순서)에 대응하는 스테이션 노드 id 목록을 찾습니다.

        Raises:
            RoadmapInputError: 상호작용 지점에 해당하는 스테이션 노드가 없을 때
        """
        stations = self.station_nodes()
        result = []
        for ip_id, p in zip(env.interaction_point_ids, env.interaction_points):
            match = [n for n in stations if self.point(n).distance_to(p) <= 1e-6]
            if not match:
                raise RoadmapInputError(f"상호작용 지점 {ip_id} ({p.x}, {p.y})에 해당하는 노드가 로드맵에 없습니다")
            result.append(match[0])
        return result

    def station_node_ids(self, env: Optional[Environment] = None) -> List[int]:
        """환경이 주어지면 좌표로 매칭하고, 아니면 스테이션 노드를 id 순서로 반환합니다."""
        if env is not None:
            return self.locate_interaction_points(env)
        return self.station_nodes()

    def to_document(self) -> Dict:
        return {
            "nodes": [
                {"id": n, "x": self.point(n).x, "y": self.point(n).y, "kind": self.kind(n).value}
                for n in self.nodes()
            ],
            "edges": [{"a": a, "b": b, "usage": self.usage(a, b)} for a, b in self.edges()],
        }

    @classmethod
    def from_document(cls, document: Dict) -> "Roadmap":
        """
        로드맵 문서를 읽어 Roadmap을 만듭니다.

        Raises:
            RoadmapInputError: 스키마 위반, 0..n-1 이 아닌 노드 id, 중복 간선, 자기 루프, 알 수 없는 노드
        """
        if not isinstance(document, dict) or "nodes" not in document or "edges" not in document:
            raise RoadmapInputError("로드맵 문서에는 'nodes'와 'edges'가 필요합니다")
        rm = cls()
        try:
            for node in document["nodes"]:
                node_id = node["id"]
                if not isinstance(node_id, int) or isinstance(node_id, bool):
                    raise RoadmapInputError(f"노드 id는 정수여야 합니다: {node_id!r}")
                if node_id in rm.graph:
                    raise RoadmapInputError(f"중복된 노드 id: {node_id}")
                rm.add_node(Point(float(node["x"]), float(node["y"])), NodeKind(node["kind"]), node_id)
            if rm.nodes() != list(range(rm.node_count)):
                raise RoadmapInputError(f"노드 id는 0..{rm.node_count - 1} 범위를 빠짐없이 채워야 합니다")
            for edge in document["edges"]:
                a, b = edge["a"], edge["b"]
                if a == b:
                    raise RoadmapInputError(f"자기 루프 간선: ({a}, {b})")
                if a not in rm.graph or b not in rm.graph:
                    raise RoadmapInputError(f"존재하지 않는 노드를 잇는 간선: ({a}, {b})")
                if rm.has_edge(a, b):
                    raise RoadmapInputError(f"중복 간선: ({a}, {b})")
                usage = edge.get("usage", 0)
                if not isinstance(usage, int) or usage < 0:
                    raise RoadmapInputError(f"간선 ({a}, {b})의 usage가 유효하지 않습니다: {usage!r}")
                rm.add_edge(a, b, usage)
        except (KeyError, TypeError) as e:
            raise RoadmapInputError(f"로드맵 문서 스키마 오류: {e}") from e
        except ValueError as e:
            if isinstance(e, RoadmapInputError):
                raise
            raise RoadmapInputError(f"로드맵 문서 값 오류: {e}") from e
        return rm

    def __eq__(self, other):
        if not isinstance(other, Roadmap):
            return NotImplemented
        return self.to_document() == other.to_document()

    def __repr__(self):
        return f"Roadmap(nodes={self.node_count}, edges={self.edge_count})"
