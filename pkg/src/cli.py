"""
명령줄 인터페이스 모듈입니다.
generate / baseline / eval / render 하위 명령을 제공합니다.

종료 코드: 0 성공, 2 입력/검증 오류, 3 수요 쌍 연결 불가
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from src.baselines import METHODS, BaselineConfig, generate_baseline, random_baseline_runs
from src.config_loader import load_render_style, load_roadmap_settings, setup_logging
from src.generator import STAGES, RoadmapGenerator
from src.map_loader import load_environment_file, load_roadmap, load_transport_matrix_file, save_roadmap
from src.metrics import evaluate, format_json, format_table
from src.model import DisconnectedDemandError, Environment, Roadmap, RoadmapInputError
from src.render import render_svg, save_svg
from src.smooth import smooth_roadmap

logger = logging.getLogger("roadmap")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DISCONNECTED = 3


def _settings(args) -> Dict[str, Any]:
    settings = load_roadmap_settings(args.settings)
    # 명령줄 값이 설정 파일보다 우선
    overrides = {
        "k_max": getattr(args, "k_max", None),
        "penalty_base": getattr(args, "penalty_base", None),
        "grid_resolution": getattr(args, "grid_res", None),
        "d_ad": getattr(args, "d_ad", None),
        "random_runs": getattr(args, "random_runs", None),
    }
    for key, value in overrides.items():
        if value is not None:
            settings[key] = value
    return settings


def _d_ad(settings: Dict[str, Any], env: Environment) -> float:
    return env.robot.d_s if settings.get("d_ad") is None else float(settings["d_ad"])


def _svg(env: Environment, rm: Roadmap, settings: Dict[str, Any], smooth: bool, style_path: Optional[str]) -> str:
    overlay = None
    if smooth:
        overlay = smooth_roadmap(rm, _d_ad(settings, env), env.robot,
                                 reach_factor=float(settings["blend_reach_factor"]),
                                 sample_step=float(settings["sample_step"]))
    return render_svg(env, rm, load_render_style(style_path), overlay)


def _stage_path(path: str, stage: str) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}_{stage}{ext}"


def cmd_generate(args) -> int:
    settings = _settings(args)
    env = load_environment_file(args.env)
    demand = load_transport_matrix_file(args.demand, env)
    result = RoadmapGenerator.from_settings(settings).generate(env, demand)

    if args.stage == "all":
        save_roadmap(result.optimized, args.out)
        for stage in STAGES:
            save_roadmap(result.stage(stage), _stage_path(args.out, stage))
            if args.svg:
                svg = _svg(env, result.stage(stage), settings, stage == "optimized", args.style)
                save_svg(svg, _stage_path(args.svg, stage))
    else:
        rm = result.stage(args.stage)
        save_roadmap(rm, args.out)
        if args.svg:
            save_svg(_svg(env, rm, settings, args.stage == "optimized", args.style), args.svg)

    logger.info(f"로드맵 저장: {args.out} (노드 {result.optimized.node_count}, 간선 {result.optimized.edge_count})")
    return EXIT_OK


def cmd_baseline(args) -> int:
    settings = _settings(args)
    env = load_environment_file(args.env)
    demand = load_transport_matrix_file(args.demand, env)
    generator = RoadmapGenerator.from_settings(settings)
    cfg = BaselineConfig.for_environment(env, args.method, args.seed, int(settings["random_max_rejections"]))
    logger.info(f"기준 방법 {cfg.method}: 간격 {cfg.spacing:.2f} m")
    rm = generate_baseline(env, demand.scaled(generator.demand_scale), cfg, generator.policy)
    save_roadmap(rm, args.out)
    if args.svg:
        save_svg(_svg(env, rm, settings, False, args.style), args.svg)
    logger.info(f"기준 로드맵 저장: {args.out} (노드 {rm.node_count}, 간선 {rm.edge_count})")
    return EXIT_OK


def cmd_eval(args) -> int:
    env = load_environment_file(args.env)
    demand = load_transport_matrix_file(args.demand, env)
    names = [os.path.splitext(os.path.basename(p))[0] for p in args.roadmap]
    reports = [evaluate(load_roadmap(path), demand, env) for path in args.roadmap]
    if args.random_mean:
        settings = _settings(args)
        runs = int(settings["random_runs"])
        generator = RoadmapGenerator.from_settings(settings)
        summary = random_baseline_runs(env, demand.scaled(generator.demand_scale), seeds=range(runs),
                                       policy=generator.policy,
                                       max_rejections=int(settings["random_max_rejections"]))
        reports.append(summary.mean)
        names.append(f"random_mean{runs}")

    if args.format == "json":
        if args.compare or len(reports) == 1:
            print(format_json(reports, names))
        else:
            for report, name in zip(reports, names):
                print(format_json([report], [name]))
    else:
        if args.compare or len(reports) == 1:
            print(format_table(reports, names))
        else:
            print("\n\n".join(format_table([report], [name]) for report, name in zip(reports, names)))
    return EXIT_OK


def cmd_render(args) -> int:
    settings = _settings(args)
    env = load_environment_file(args.env)
    rm = load_roadmap(args.roadmap)
    save_svg(_svg(env, rm, settings, args.smooth, args.style), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roadmap", description="이동 로봇 플릿용 연속 공간 로드맵 생성기")
    parser.add_argument("-v", "--verbose", action="store_true", help="디버그 로그 출력")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--env", required=True, help="환경 JSON 파일")
    common.add_argument("--settings", default=None, help="로드맵 설정 파일 (기본: config/roadmap_settings.json)")
    common.add_argument("--style", default=None, help="렌더 스타일 파일 (기본: config/render_style.json)")

    gen = sub.add_parser("generate", parents=[common], help="로드맵 생성")
    gen.add_argument("--demand", required=True, help="운송 행렬 JSON 파일")
    gen.add_argument("--out", required=True, help="출력 로드맵 JSON 파일")
    gen.add_argument("--svg", default=None, help="SVG 출력 파일")
    gen.add_argument("--stage", choices=list(STAGES) + ["all"], default="optimized",
                     help="저장할 단계 (all: 모든 단계를 <out>_<stage>.json 으로 저장)")
    gen.add_argument("--k-max", dest="k_max", type=int, default=None, help="수요 쌍당 최대 경로 수")
    gen.add_argument("--penalty-base", dest="penalty_base", type=float, default=None, help="벌점 계수의 밑")
    gen.add_argument("--d-ad", dest="d_ad", type=float, default=None, help="허용 이탈 거리 (m)")
    gen.add_argument("--grid-res", dest="grid_res", type=float, default=None, help="로컬 그리드 해상도 d_g (m)")
    gen.set_defaults(func=cmd_generate)

    base = sub.add_parser("baseline", parents=[common], help="비교용 기준 로드맵 생성")
    base.add_argument("--demand", required=True, help="운송 행렬 JSON 파일")
    base.add_argument("--method", required=True, choices=METHODS, help="기준 방법")
    base.add_argument("--seed", type=int, default=0, help="무작위 시드 (random 전용)")
    base.add_argument("--out", required=True, help="출력 로드맵 JSON 파일")
    base.add_argument("--svg", default=None, help="SVG 출력 파일")
    base.set_defaults(func=cmd_baseline)

    ev = sub.add_parser("eval", parents=[common], help="로드맵 평가")
    ev.add_argument("--demand", required=True, help="운송 행렬 JSON 파일")
    ev.add_argument("--roadmap", required=True, nargs="+", help="평가할 로드맵 JSON 파일")
    ev.add_argument("--format", choices=["table", "json"], default="table", help="출력 형식")
    ev.add_argument("--compare", action="store_true", help="여러 로드맵을 하나의 표로 비교")
    ev.add_argument("--random-mean", dest="random_mean", action="store_true",
                    help="무작위 기준 방법을 random_runs 개 시드로 반복한 평균 열 추가")
    ev.add_argument("--random-runs", dest="random_runs", type=int, default=None, help="무작위 기준 반복 횟수")
    ev.set_defaults(func=cmd_eval)

    ren = sub.add_parser("render", parents=[common], help="SVG 렌더링")
    ren.add_argument("--roadmap", required=True, help="로드맵 JSON 파일")
    ren.add_argument("--smooth", action="store_true", help="스무딩 오버레이 추가")
    ren.add_argument("--d-ad", dest="d_ad", type=float, default=None, help="허용 이탈 거리 (m)")
    ren.add_argument("--out", required=True, help="SVG 출력 파일")
    ren.set_defaults(func=cmd_render)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except RoadmapInputError as e:
        logger.error(f"입력 오류: {e}")
        return EXIT_INPUT
    except DisconnectedDemandError as e:
        logger.error(f"수요 쌍 연결 불가: {e}")
        return EXIT_DISCONNECTED
    except ValueError as e:
        logger.error(f"잘못된 값: {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
