"""
연속 공간 로드맵 생성기 실행 진입점
사용법: python main.py {generate|baseline|eval|render} ...
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
