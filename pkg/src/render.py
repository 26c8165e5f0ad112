"""
SVG 렌더링 모듈입니다.
환경(장애물, 여유 거리 음영, 스테이션)과 로드맵(노드, 간선, 스무딩 오버레이)을 층별로 그립니다.
"""

import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import drawsvg as draw
import shapely

from src.model import Environment, NodeKind, Roadmap
from src.smooth import SmoothedPath

logger = logging.getLogger(__name__)


@dataclass
class RenderStyle:
    """SVG 렌더 스타일 (층 표시 여부, 선 두께, 색, 미터당 픽셀 수)"""

    scale: float = 40.0
    margin: float = 20.0
    show_obstacles: bool = True
    show_clearance: bool = True
    show_edges: bool = True
    show_nodes: bool = True
    show_smoothed: bool = True
    show_stations: bool = True
    node_kinds: List[str] = field(default_factory=lambda: [k.value for k in NodeKind])
    node_size: float = 5.0
    station_size: float = 7.0
    edge_width: float = 1.5
    smooth_width: float = 1.5
    outline_width: float = 1.0
    free_color: str = "#ffffff"
    clearance_color: str = "#dcdcdc"
    obstacle_color: str = "#8c8c8c"
    footprint_color: str = "#f2b8b5"
    edge_color: str = "#1f4e9c"
    node_color: str = "#1f4e9c"
    smooth_color: str = "#2f80ed"
    station_color: str = "#d7191c"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale은 양수여야 합니다: {self.scale}")
        unknown = set(self.node_kinds) - {k.value for k in NodeKind}
        if unknown:
            raise ValueError(f"알 수 없는 노드 종류: {sorted(unknown)}")

    def to_dict(self) -> Dict:
        return asdict(self)


class _Canvas:
    """월드 좌표(m, y 위쪽)를 SVG 좌표(px, y 아래쪽)로 바꿉니다."""

    def __init__(self, bounds, style: RenderStyle):
        self.minx, self.miny, self.maxx, self.maxy = bounds
        self.style = style
        self.width = round((self.maxx - self.minx) * style.scale + 2 * style.margin, 3)
        self.height = round((self.maxy - self.miny) * style.scale + 2 * style.margin, 3)

    def x(self, x: float) -> float:
        return round(float(self.style.margin + (x - self.minx) * self.style.scale), 3)

    def y(self, y: float) -> float:
        return round(float(self.style.margin + (self.maxy - y) * self.style.scale), 3)


def _polygon_path(canvas: _Canvas, geometry, **kwargs) -> Optional[draw.Path]:
    """shapely (Multi)Polygon을 evenodd 채우기 경로로 그립니다."""
    parts = [g for g in shapely.get_parts(geometry) if not g.is_empty]
    if not parts:
        return None
    path = draw.Path(fill_rule="evenodd", **kwargs)
    for polygon in parts:
        for ring in [polygon.exterior] + list(polygon.interiors):
            coords = list(ring.coords)[:-1]
            path.M(canvas.x(coords[0][0]), canvas.y(coords[0][1]))
            for x, y in coords[1:]:
                path.L(canvas.x(x), canvas.y(y))
            path.Z()
    return path


def _environment_layers(d: draw.Drawing, canvas: _Canvas, env: Environment, style: RenderStyle) -> None:
    fs = env.free_space
    r = fs.clearance_radius
    background = draw.Group(id="environment")

    if style.show_clearance:
        # 경계 안쪽 전체를 음영으로 칠하고, 여유 거리 밖(자유 공간)만 흰색으로 다시 칠함
        shade = _polygon_path(canvas, env.boundary.shape, fill=style.clearance_color)
        free_area = env.boundary.shape.buffer(-r)
        if fs.holes:
            free_area = free_area.difference(shapely.union_all([h.shape.buffer(r) for h in fs.holes]))
        free = _polygon_path(canvas, free_area, fill=style.free_color)
        for element in (shade, free):
            if element is not None:
                background.append(element)
    else:
        background.append(_polygon_path(canvas, env.boundary.shape, fill=style.free_color))

    if style.show_obstacles:
        for obstacle in env.obstacles:
            background.append(_polygon_path(canvas, obstacle.shape, fill=style.obstacle_color))
        for station in env.stations:
            if station.footprint is not None:
                background.append(_polygon_path(canvas, station.footprint.shape, fill=style.footprint_color,
                                                stroke=style.obstacle_color, stroke_width=style.outline_width))

    background.append(_polygon_path(canvas, env.boundary.shape, fill="none", stroke="#000000",
                                    stroke_width=style.outline_width))
    d.append(background)


def render_svg(env: Environment, rm: Optional[Roadmap] = None, style: Optional[RenderStyle] = None,
               overlay: Optional[Sequence[SmoothedPath]] = None) -> str:
    """
    환경과 로드맵을 SVG 문자열로 그립니다. 같은 입력이면 같은 문자열을 돌려줍니다.

    Args:
        env: 환경
        rm: 로드맵 (None이면 환경만)
        style: 렌더 스타일
        overlay: 스무딩 곡선 목록 (smooth.smooth_roadmap 결과)
    """
    style = style or RenderStyle()
    canvas = _Canvas(env.boundary.bounds(), style)
    d = draw.Drawing(canvas.width, canvas.height)
    _environment_layers(d, canvas, env, style)

    if rm is not None and style.show_edges:
        edges = draw.Group(id="edges", stroke=style.edge_color, stroke_width=style.edge_width,
                           stroke_dasharray="6,4", fill="none")
        for a, b in rm.edges():
            pa, pb = rm.point(a), rm.point(b)
            edges.append(draw.Line(canvas.x(pa.x), canvas.y(pa.y), canvas.x(pb.x), canvas.y(pb.y)))
        d.append(edges)

    if overlay and style.show_smoothed:
        smoothed = draw.Group(id="smoothed", stroke=style.smooth_color, stroke_width=style.smooth_width,
                              fill="none")
        for sp in overlay:
            path = draw.Path()
            start = sp.pieces[0][0]
            path.M(canvas.x(start[0]), canvas.y(start[1]))
            for piece in sp.pieces:
                path.C(canvas.x(piece[1][0]), canvas.y(piece[1][1]),
                       canvas.x(piece[2][0]), canvas.y(piece[2][1]),
                       canvas.x(piece[3][0]), canvas.y(piece[3][1]))
            smoothed.append(path)
        d.append(smoothed)

    if rm is not None and style.show_nodes:
        nodes = draw.Group(id="nodes", stroke=style.node_color, stroke_width=style.edge_width)
        h = style.node_size / 2.0
        for n in rm.nodes():
            if rm.kind(n).value not in style.node_kinds:
                continue
            x, y = canvas.x(rm.point(n).x), canvas.y(rm.point(n).y)
            nodes.append(draw.Line(x - h, y - h, x + h, y + h))
            nodes.append(draw.Line(x - h, y + h, x + h, y - h))
        d.append(nodes)

    if style.show_stations:
        stations = draw.Group(id="stations", fill=style.station_color)
        h = style.station_size / 2.0
        for p in env.interaction_points:
            x, y = canvas.x(p.x), canvas.y(p.y)
            stations.append(draw.Lines(x, y - h, x + h, y, x, y + h, x - h, y, close=True))
        d.append(stations)

    return d.as_svg()


def save_svg(svg: str, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(svg)
    logger.info(f"SVG 저장: {path}")
