"""Database 초기화 및 설정"""

import os
from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from src.config import get_settings
from .models import Base

# 기본 데이터베이스 경로 (SQLite)
DB_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(__file__))), "data")
DB_PATH = os.path.join(DB_DIR, "studies.db")
DEFAULT_DATABASE_URL = f"sqlite:///{DB_PATH}"


def resolve_database_url(database_url: Optional[str] = None) -> str:
    """인자 > STUDIES_DATABASE_URL > 기본 SQLite 경로"""
    return database_url or get_settings().database_url or DEFAULT_DATABASE_URL


def get_engine(database_url: Optional[str] = None):
    """데이터베이스 엔진 반환"""
    url = resolve_database_url(database_url)
    if url == DEFAULT_DATABASE_URL:
        # 디렉토리 생성
        os.makedirs(DB_DIR, exist_ok=True)
    return create_engine(url, echo=False)


def init_database(database_url: Optional[str] = None):
    """데이터베이스 초기화 (테이블 생성)"""
    engine = get_engine(database_url)
    Base.metadata.create_all(engine)
    return engine


def get_session(engine=None):
    """데이터베이스 세션 반환"""
    if engine is None:
        engine = get_engine()
    Session = sessionmaker(bind=engine)
    return Session()
