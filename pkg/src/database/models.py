"""Database Models - SQLAlchemy 모델 정의"""

from datetime import datetime

from sqlalchemy import (
    JSON, CheckConstraint, Column, DateTime, Float, ForeignKey, Integer, String, Text,
)
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


class SweepRun(Base):
    """sweep 실행 한 번 (입력 spec 포함)"""
    __tablename__ = 'sweep_runs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    label = Column(String(255), nullable=True)
    created_at = Column(DateTime, default=datetime.utcnow, nullable=False, index=True)
    spec = Column(JSON, nullable=False)

    # 관계
    rows = relationship("ConvergenceRecord", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<SweepRun(id={self.id}, label='{self.label}')>"


class ConvergenceRecord(Base):
    """sweep 결과 한 행"""
    __tablename__ = 'convergence_rows'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('sweep_runs.id', ondelete='CASCADE'), nullable=False, index=True)
    k = Column(Integer, nullable=False)
    N = Column(Integer, nullable=False)
    eps = Column(Float, nullable=False)
    lam = Column("lambda", Float, nullable=False)
    alpha0 = Column(Float, nullable=False)
    alpha = Column(Float, nullable=True)
    energy_err = Column(Float, nullable=True)
    l2_err = Column(Float, nullable=True)
    h1semi_err = Column(Float, nullable=True)
    interp_l2 = Column(Float, nullable=True)
    supercloseness = Column(Float, nullable=True)
    energy_rate = Column(Float, nullable=True)
    l2_rate = Column(Float, nullable=True)
    error = Column(Text, nullable=True)  # 실패한 케이스의 예외 메시지

    # 관계
    run = relationship("SweepRun", back_populates="rows")

    # 제약 조건
    __table_args__ = (
        CheckConstraint("k >= 1", name='check_order'),
    )

    def __repr__(self):
        return f"<ConvergenceRecord(run_id={self.run_id}, k={self.k}, N={self.N}, eps={self.eps})>"
