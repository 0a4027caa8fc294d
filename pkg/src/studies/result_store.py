"""Result Store - sweep 결과를 DB 에 저장하고 다시 읽기"""

import logging
import math
from typing import Dict, List, Optional

from sqlalchemy import desc
from sqlalchemy.orm import Session

from src.database.db import get_session
from src.database.models import ConvergenceRecord, SweepRun
from src.studies.sweep import ConvergenceRow

logger = logging.getLogger(__name__)

_ERROR_FIELDS = ("energy_err", "l2_err", "h1semi_err", "interp_l2", "supercloseness")


def _to_db(value: Optional[float]) -> Optional[float]:
    # NaN 은 NULL 로
    if value is None or math.isnan(value):
        return None
    return float(value)


def _from_db(value: Optional[float]) -> float:
    return float("nan") if value is None else float(value)


class ResultStore:
    """sweep 실행과 결과 행을 관리하는 저장소"""

    def __init__(self, session: Optional[Session] = None):
        """
        Args:
            session: 데이터베이스 세션 (기본값: 새로 생성)
        """
        self.session = session or get_session()

    def create_run(self, spec: Dict, label: Optional[str] = None) -> SweepRun:
        """
        새 sweep 실행 기록

        Args:
            spec: SweepSpec.to_dict()
            label: 구분용 이름 (선택사항)

        Returns:
            생성된 SweepRun 객체
        """
        run = SweepRun(spec=spec, label=label)
        self.session.add(run)
        self.session.commit()
        return run

    def save_rows(self, run_id: int, rows: List[ConvergenceRow]) -> int:
        """
        결과 행 저장

        Args:
            run_id: SweepRun id
            rows: sweep 결과

        Returns:
            저장한 행 수
        """
        for row in rows:
            record = ConvergenceRecord(
                run_id=run_id, k=row.k, N=row.N, eps=row.eps, lam=row.lam,
                alpha0=row.alpha0, alpha=_to_db(row.alpha),
                energy_rate=_to_db(row.energy_rate), l2_rate=_to_db(row.l2_rate),
                error=row.error,
                **{name: _to_db(getattr(row, name)) for name in _ERROR_FIELDS},
            )
            self.session.add(record)
        self.session.commit()
        logger.info("saved %d rows for sweep run %d", len(rows), run_id)
        return len(rows)

    def load_rows(self, run_id: int) -> List[ConvergenceRow]:
        """
        저장된 행 로드 ((k, eps, lambda, alpha0, N) 순)

        Args:
            run_id: SweepRun id

        Returns:
            ConvergenceRow 리스트
        """
        records = self.session.query(ConvergenceRecord).filter(
            ConvergenceRecord.run_id == run_id
        ).order_by(
            ConvergenceRecord.k, ConvergenceRecord.eps, ConvergenceRecord.lam,
            ConvergenceRecord.alpha0, ConvergenceRecord.N,
        ).all()

        return [
            ConvergenceRow(
                k=r.k, N=r.N, eps=r.eps, lam=r.lam, alpha0=r.alpha0, alpha=_from_db(r.alpha),
                energy_rate=r.energy_rate, l2_rate=r.l2_rate, error=r.error,
                **{name: _from_db(getattr(r, name)) for name in _ERROR_FIELDS},
            )
            for r in records
        ]

    def latest_run(self) -> Optional[SweepRun]:
        """가장 최근 SweepRun (없으면 None)"""
        return self.session.query(SweepRun).order_by(desc(SweepRun.created_at), desc(SweepRun.id)).first()

    def count_rows(self, run_id: int) -> int:
        """실행의 행 수 반환"""
        return self.session.query(ConvergenceRecord).filter(
            ConvergenceRecord.run_id == run_id
        ).count()
