"""
공용 테스트 픽스처
maps/ 의 환경 문서와 작은 합성 환경을 제공합니다.
"""

import os
import sys

import numpy as np
import pytest

# 프로젝트 루트 경로를 Python 경로에 추가
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.generator import RoadmapGenerator
from src.geometry import Point, Polygon
from src.map_loader import default_maps_dir, load_environment_file, load_transport_matrix_file
from src.model import Environment, Robot, Station, TransportMatrix

MAPS_DIR = default_maps_dir()


def make_environment(width, height, obstacles=(), points=(), robot=None):
    """직사각형 경계, 직사각형 장애물 (x0, y0, x1, y1), 상호작용 지점 목록으로 환경을 만듭니다."""
    boundary = Polygon.from_coords([[0, 0], [width, 0], [width, height], [0, height]])
    holes = tuple(
        Polygon.from_coords([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]) for x0, y0, x1, y1 in obstacles
    )
    stations = tuple(Station(str(i + 1), (Point(float(x), float(y)),)) for i, (x, y) in enumerate(points))
    return Environment(boundary, holes, stations, robot or Robot(0.5, 0.35, 0.2))


def uniform_demand(env, value=1):
    n = len(env.interaction_points)
    T = np.full((n, n), value, dtype=np.int64)
    np.fill_diagonal(T, 0)
    return TransportMatrix(tuple(env.interaction_point_ids), T)


def load_map(name):
    env = load_environment_file(os.path.join(MAPS_DIR, f"{name}.json"))
    demand = load_transport_matrix_file(os.path.join(MAPS_DIR, f"{name}_demand.json"), env)
    return env, demand


@pytest.fixture
def robot():
    return Robot(0.5, 0.35, 0.2)


@pytest.fixture(scope="session")
def abstract_map():
    return load_map("abstract_env")


@pytest.fixture(scope="session")
def env1_map():
    return load_map("env1")


@pytest.fixture(scope="session")
def abstract_result(abstract_map):
    env, demand = abstract_map
    return RoadmapGenerator().generate(env, demand)


@pytest.fixture(scope="session")
def env1_result(env1_map):
    env, demand = env1_map
    return RoadmapGenerator().generate(env, demand)
