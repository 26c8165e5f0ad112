"""
설정 로드 유틸리티 모듈
로그 설정과 config/ 디렉터리의 설정 파일을 로드하는 함수들을 제공합니다.
"""

import os
import json
import logging
from typing import Dict, Any, Optional

from src.render import RenderStyle

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

DEFAULT_ROADMAP_SETTINGS = {
    "penalty_base": 1.1,
    "k_max": 5,
    "demand_scale": 1.0,
    "grid_resolution": None,  # 자동: √2·d_ve_min 을 cm 단위로 올림
    "max_grid_size": None,  # 자동: ⌈max(폭, 높이) / d_g⌉
    "candidate_radius_factor": 3.0,  # None이면 모든 노드 쌍
    "d_ad": None,  # 자동: d_s
    "blend_reach_factor": 2.0,
    "sample_step": 0.05,
    "random_max_rejections": 10000,
    "random_runs": 10,
}


def setup_logging(verbose: bool = False) -> None:
    """
    루트 로거에 스트림 핸들러 하나를 설정합니다.

    Args:
        verbose: True면 DEBUG, 아니면 INFO
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        force=True,
    )


def _settings_path(file_name: str) -> str:
    # 현재 모듈 경로 기준으로 config/<file_name> 경로 설정
    current_dir = os.path.dirname(os.path.abspath(__file__))
    project_root = os.path.dirname(current_dir)
    return os.path.join(project_root, "config", file_name)


def _load_settings(file_name: str, default_settings: Dict[str, Any],
                   custom_path: Optional[str] = None) -> Dict[str, Any]:
    settings_path = custom_path or _settings_path(file_name)

    # 파일 존재 여부 확인
    if not os.path.exists(settings_path):
        logger.warning(f"설정 파일을 찾을 수 없습니다: {settings_path} (기본 설정을 사용합니다)")
        return dict(default_settings)

    try:
        with open(settings_path, 'r', encoding='utf-8') as f:
            settings = json.load(f)

        # comments 필드 제거 (사용하지 않음)
        if 'comments' in settings:
            del settings['comments']

        unknown = sorted(set(settings) - set(default_settings))
        if unknown:
            logger.warning(f"알 수 없는 설정 키를 무시합니다: {unknown}")
            for key in unknown:
                del settings[key]

        # 기본 설정과 병합 (누락된 설정은 기본값 사용)
        for key, value in default_settings.items():
            if key not in settings:
                settings[key] = value

        return settings

    except (OSError, json.JSONDecodeError, TypeError) as e:
        logger.warning(f"설정 파일 로드 중 오류 발생: {e} (기본 설정을 사용합니다)")
        return dict(default_settings)


def load_roadmap_settings(custom_path: Optional[str] = None) -> Dict[str, Any]:
    """
    로드맵 생성 설정 파일을 로드합니다.

    Args:
        custom_path: 사용자 지정 설정 파일 경로 (선택 사항)

    Returns:
        설정 딕셔너리 (누락된 키는 기본값)
    """
    return _load_settings("roadmap_settings.json", DEFAULT_ROADMAP_SETTINGS, custom_path)


def load_render_style(custom_path: Optional[str] = None) -> RenderStyle:
    """SVG 렌더 스타일 설정 파일을 로드합니다."""
    defaults = RenderStyle().to_dict()
    settings = _load_settings("render_style.json", defaults, custom_path)
    try:
        return RenderStyle(**settings)
    except (TypeError, ValueError) as e:
        logger.warning(f"렌더 스타일 값이 유효하지 않습니다: {e} (기본 스타일을 사용합니다)")
        return RenderStyle()
