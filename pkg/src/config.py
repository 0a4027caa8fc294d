"""환경 설정 로더

.env 파일과 환경변수에서 설정을 읽습니다. (기본값 포함)

- FEM_LOG_LEVEL          (default: WARNING)
- FEM_MAX_WORKERS        (default: 4)        # sweep 병렬 작업 수, 1이면 순차 실행
- FEM_LEMMA_CEILING      (default: 1e3)      # 메쉬 보조정리 fitted constant / kappa^p 상한
- FEM_LEMMA_GROWTH       (default: 1.25)     # N 두 배 시 허용 증가 비율
- FEM_NODE_SCHEME        (default: lobatto)  # lobatto | equispaced
- FEM_QUAD_EXTRA         (default: 3)        # 조립 quadrature 점 수 q = k + FEM_QUAD_EXTRA
- FEM_ERR_SUBDIV         (default: 2)
- FEM_ERR_LAYER_SUBDIV   (default: 5)
- FEM_PIVOT_TOL          (default: 1e-14)
- FEM_REFINE_STEPS       (default: 2)        # band LU 뒤 반복 개선 횟수
- STUDIES_DATABASE_URL   (default: "")       # 비어 있으면 DB 저장 안 함
"""

import os
from dataclasses import dataclass
from functools import lru_cache

from dotenv import load_dotenv


@dataclass(frozen=True)
class Settings:
    log_level: str = "WARNING"
    max_workers: int = 4
    lemma_ceiling: float = 1e3
    lemma_growth: float = 1.25
    node_scheme: str = "lobatto"
    quad_extra: int = 3
    err_subdiv: int = 2
    err_layer_subdiv: int = 5
    pivot_tol: float = 1e-14
    refine_steps: int = 2
    database_url: str = ""


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw.strip())
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from e


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw.strip())
    except ValueError as e:
        raise ValueError(f"{name} must be a number, got {raw!r}") from e


def load_settings() -> Settings:
    """
    .env + 환경변수에서 Settings 생성 (캐시 없음)

    Returns:
        Settings 객체
    """
    load_dotenv()
    return Settings(
        log_level=os.getenv("FEM_LOG_LEVEL", "WARNING").strip().upper(),
        max_workers=max(1, _env_int("FEM_MAX_WORKERS", 4)),
        lemma_ceiling=_env_float("FEM_LEMMA_CEILING", 1e3),
        lemma_growth=_env_float("FEM_LEMMA_GROWTH", 1.25),
        node_scheme=os.getenv("FEM_NODE_SCHEME", "lobatto").strip().lower(),
        quad_extra=_env_int("FEM_QUAD_EXTRA", 3),
        err_subdiv=_env_int("FEM_ERR_SUBDIV", 2),
        err_layer_subdiv=_env_int("FEM_ERR_LAYER_SUBDIV", 5),
        pivot_tol=_env_float("FEM_PIVOT_TOL", 1e-14),
        refine_steps=max(0, _env_int("FEM_REFINE_STEPS", 2)),
        database_url=os.getenv("STUDIES_DATABASE_URL", "").strip(),
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """프로세스 전체에서 공유하는 Settings 반환"""
    return load_settings()
