"""
환경 문서, 운송 행렬 문서, 로드맵 파일 로더 모듈입니다.
maps/ 디렉터리의 JSON 문서를 읽어 검증된 모델 객체로 변환하고 로드맵을 저장합니다.
"""

import json
import logging
import os
from typing import Any, Dict

import numpy as np

from src.geometry import Point, Polygon, clearance
from src.model import (
    Environment,
    Roadmap,
    RoadmapInputError,
    Robot,
    Station,
    TransportMatrix,
)

logger = logging.getLogger(__name__)


def default_maps_dir() -> str:
    # 현재 모듈 경로 기준으로 maps/ 경로 설정
    current_dir = os.path.dirname(os.path.abspath(__file__))
    project_root = os.path.dirname(current_dir)
    return os.path.join(project_root, "maps")


def read_document(path: str) -> Any:
    """
    JSON 문서를 읽습니다.

    Raises:
        RoadmapInputError: 파일이 없거나 JSON 파싱에 실패했을 때
    """
    if not os.path.exists(path):
        raise RoadmapInputError(f"파일이 존재하지 않습니다: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise RoadmapInputError(f"JSON 파싱 오류 ({path}): {e}") from e
    except OSError as e:
        raise RoadmapInputError(f"파일을 읽을 수 없습니다 ({path}): {e}") from e


def _polygon(coords: Any, what: str) -> Polygon:
    try:
        return Polygon.from_coords(coords)
    except (TypeError, IndexError, ValueError) as e:
        raise RoadmapInputError(f"{what}: 유효하지 않은 다각형입니다 ({e})") from e


def _point(coords: Any, what: str) -> Point:
    try:
        if len(coords) != 2:
            raise ValueError(f"좌표 길이 {len(coords)}")
        return Point(float(coords[0]), float(coords[1]))
    except (TypeError, ValueError) as e:
        raise RoadmapInputError(f"{what}: 유효하지 않은 좌표입니다 ({e})") from e


def _station(document: Dict, index: int) -> Station:
    if not isinstance(document, dict) or "id" not in document:
        raise RoadmapInputError(f"스테이션 {index}: 'id'가 필요합니다")
    station_id = str(document["id"])
    raw_points = document.get("interaction_points")
    if not raw_points:
        raise RoadmapInputError(f"스테이션 {station_id}: 상호작용 지점이 없습니다")
    points = tuple(_point(p, f"스테이션 {station_id} 상호작용 지점") for p in raw_points)

    footprint = None
    if document.get("footprint") is not None:
        footprint = _polygon(document["footprint"], f"스테이션 {station_id} footprint")
    is_obstacle = bool(document.get("is_obstacle", False))
    try:
        return Station(station_id, points, footprint, is_obstacle)
    except ValueError as e:
        raise RoadmapInputError(str(e)) from e


def load_environment(document: Dict) -> Environment:
    """
    환경 문서를 검증된 Environment로 변환합니다.

    Args:
        document: {boundary, obstacles, stations, robot} 형태의 JSON 객체

    Returns:
        다각형 방향이 정규화된 Environment

    Raises:
        RoadmapInputError: 스키마 위반, 자기 교차 다각형, 자유 공간 밖의 상호작용 지점
    """
    if not isinstance(document, dict):
        raise RoadmapInputError("환경 문서는 JSON 객체여야 합니다")
    for key in ("boundary", "stations", "robot"):
        if key not in document:
            raise RoadmapInputError(f"환경 문서에 '{key}' 항목이 없습니다")

    boundary = _polygon(document["boundary"], "외곽 경계")
    obstacles = tuple(
        _polygon(coords, f"장애물 {i}") for i, coords in enumerate(document.get("obstacles", []))
    )
    stations = tuple(_station(s, i) for i, s in enumerate(document["stations"]))

    ids = [s.id for s in stations]
    if len(set(ids)) != len(ids):
        raise RoadmapInputError(f"중복된 스테이션 id가 있습니다: {ids}")

    robot_doc = document["robot"]
    try:
        robot = Robot(float(robot_doc["r_rob"]), float(robot_doc["w_rob"]), float(robot_doc["d_s"]))
    except (KeyError, TypeError) as e:
        raise RoadmapInputError(f"로봇 파라미터 오류: {e}") from e
    except ValueError as e:
        raise RoadmapInputError(str(e)) from e

    try:
        env = Environment(boundary, obstacles, stations, robot)
        fs = env.free_space
    except ValueError as e:
        raise RoadmapInputError(str(e)) from e

    radius = fs.clearance_radius
    for station in stations:
        for ip_id, p in zip(station.interaction_point_ids(), station.interaction_points):
            value = clearance(p, fs)
            if value < radius - 1e-9:
                raise RoadmapInputError(
                    f"스테이션 {station.id}의 상호작용 지점 {ip_id} ({p.x}, {p.y})가 자유 공간 밖에 있습니다 "
                    f"(여유 거리 {value:.3f} m, 부족분 {radius - value:.3f} m)"
                )

    c = env.constraints
    logger.info(
        f"환경 로드 완료: 장애물 {len(obstacles)}개, 스테이션 {len(stations)}개, "
        f"d_v_min={c.d_v_min:.3f} m, d_ve_min={c.d_ve_min:.3f} m"
    )
    return env


def load_transport_matrix(document: Dict, env: Environment) -> TransportMatrix:
    """
    운송 행렬 문서를 읽어 환경의 상호작용 지점 순서로 정렬된 TransportMatrix를 만듭니다.

    Args:
        document: {order: [상호작용 지점 id], T: [[int]]}
        env: 상호작용 지점 순서를 정의하는 환경

    Raises:
        RoadmapInputError: 크기 불일치, 음수 항목, 대각 항목, 알 수 없는 id
    """
    if not isinstance(document, dict) or "T" not in document:
        raise RoadmapInputError("운송 행렬 문서에 'T' 항목이 없습니다")
    env_order = list(env.interaction_point_ids)
    order = [str(o) for o in document.get("order", env_order)]

    raw = document["T"]
    if not isinstance(raw, list) or any(not isinstance(row, list) for row in raw):
        raise RoadmapInputError("운송 행렬 'T'는 2차원 배열이어야 합니다")
    n = len(env_order)
    if len(raw) != n or any(len(row) != n for row in raw) or len(order) != n:
        raise RoadmapInputError(
            f"운송 행렬 크기가 상호작용 지점 수({n})와 맞지 않습니다: {len(raw)}행, order {len(order)}개"
        )
    for row in raw:
        for value in row:
            if isinstance(value, bool) or not isinstance(value, int):
                raise RoadmapInputError(f"운송 행렬 항목은 정수여야 합니다: {value!r}")

    if sorted(order) != sorted(env_order):
        unknown = sorted(set(order) ^ set(env_order))
        raise RoadmapInputError(f"운송 행렬 order가 환경의 상호작용 지점과 다릅니다: {unknown}")

    # 문서 순서를 환경 순서로 재배열
    T = np.asarray(raw, dtype=np.int64)
    perm = [order.index(ip) for ip in env_order]
    T = T[np.ix_(perm, perm)]
    matrix = TransportMatrix(tuple(env_order), T)
    logger.info(f"운송 행렬 로드 완료: {n}x{n}, 수요 쌍 {len(matrix.demand_pairs())}개")
    return matrix


def load_environment_file(path: str) -> Environment:
    return load_environment(read_document(path))


def load_transport_matrix_file(path: str, env: Environment) -> TransportMatrix:
    return load_transport_matrix(read_document(path), env)


def save_roadmap(rm: Roadmap, path: str) -> None:
    """로드맵을 JSON 파일로 저장합니다. float은 repr 그대로 기록되어 왕복 시 값이 보존됩니다."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(rm.to_document(), f, indent=2)
        f.write("\n")
    logger.debug(f"로드맵 저장: {path} (노드 {rm.node_count}, 간선 {rm.edge_count})")


def load_roadmap(path: str) -> Roadmap:
    """
    로드맵 파일을 읽습니다.

    Raises:
        RoadmapInputError: I/O 실패 또는 스키마 위반 (중복 간선 포함)
    """
    return Roadmap.from_document(read_document(path))

