# 로드맵 생성기 패키지
