"""데이터베이스 초기화 스크립트 (sweep 결과 저장용 테이블 생성)"""

import sys

from src.database.db import init_database

if __name__ == "__main__":
    url = sys.argv[1] if len(sys.argv) > 1 else None
    print("데이터베이스 초기화 중...")
    engine = init_database(url)
    print("✅ 데이터베이스 초기화 완료! (sweep_runs, convergence_rows)")
    print(f"   위치: {engine.url}")
