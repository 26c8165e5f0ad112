"""
설정 로드 테스트
"""

import json
import logging
import os
import sys

# 프로젝트 루트 경로를 Python 경로에 추가
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.config_loader import (
    DEFAULT_ROADMAP_SETTINGS,
    load_render_style,
    load_roadmap_settings,
    setup_logging,
)
from src.render import RenderStyle


def test_default_settings_file_matches_defaults():
    settings = load_roadmap_settings()
    assert settings == DEFAULT_ROADMAP_SETTINGS


def test_custom_settings_merge_with_defaults(tmp_path, caplog):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"k_max": 3, "bogus": 1, "comments": {"k_max": "..."}}), encoding="utf-8")
    with caplog.at_level(logging.WARNING):
        settings = load_roadmap_settings(str(path))
    assert settings["k_max"] == 3
    assert "bogus" not in settings and "comments" not in settings
    assert settings["penalty_base"] == DEFAULT_ROADMAP_SETTINGS["penalty_base"]
    assert set(settings) == set(DEFAULT_ROADMAP_SETTINGS)
    assert "bogus" in caplog.text


def test_missing_or_broken_settings_fall_back(tmp_path):
    assert load_roadmap_settings(str(tmp_path / "missing.json")) == DEFAULT_ROADMAP_SETTINGS
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    assert load_roadmap_settings(str(broken)) == DEFAULT_ROADMAP_SETTINGS


def test_render_style_file():
    assert load_render_style() == RenderStyle()


def test_render_style_overrides_and_invalid_values(tmp_path):
    path = tmp_path / "style.json"
    path.write_text(json.dumps({"scale": 10.0, "show_edges": False}), encoding="utf-8")
    style = load_render_style(str(path))
    assert style.scale == 10.0 and not style.show_edges
    assert style.edge_color == RenderStyle().edge_color

    path.write_text(json.dumps({"scale": -1.0}), encoding="utf-8")
    assert load_render_style(str(path)) == RenderStyle()
    path.write_text(json.dumps({"node_kinds": ["station", "tower"]}), encoding="utf-8")
    assert load_render_style(str(path)) == RenderStyle()


def test_setup_logging_levels():
    setup_logging(verbose=True)
    assert logging.getLogger().level == logging.DEBUG
    setup_logging()
    assert logging.getLogger().level == logging.INFO
