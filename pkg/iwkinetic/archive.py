"""SQLite audit trail of runs, ledger rows and check outcomes."""

from pathlib import Path
from typing import Optional
import logging

import sqlmodel
from sqlmodel import Session, select

from iwkinetic.models import CheckRecord, LedgerEntry, RunRecord

ARCHIVE_NAME = "archive.db"


class ArchiveError(RuntimeError):
    pass


def open_archive(out_dir: Path):
    try:
        engine = sqlmodel.create_engine(f"sqlite:///{Path(out_dir) / ARCHIVE_NAME}")
        sqlmodel.SQLModel.metadata.create_all(engine)
    except Exception as e:
        logging.exception(f"Error opening archive in {out_dir}: {e}")
        raise ArchiveError(f"could not open archive in {out_dir}: {e}") from e
    return engine


def record_run(
    engine,
    command: str,
    config_hash: str,
    seed: Optional[int],
    exit_code: int,
    entries: Optional[list[LedgerEntry]] = None,
    checks: Optional[list[CheckRecord]] = None,
) -> int:
    """Persist one invocation with copies of its ledger rows and check records."""
    try:
        with Session(engine) as session:
            run = RunRecord(command=command, config_hash=config_hash, seed=seed, exit_code=exit_code)
            session.add(run)
            session.flush()
            for entry in entries or []:
                session.add(LedgerEntry(**entry.model_dump(exclude={"id", "run_id"}), run_id=run.id))
            for check in checks or []:
                session.add(CheckRecord(**check.model_dump(exclude={"id", "run_id"}), run_id=run.id))
            session.commit()
            session.refresh(run)
            return run.id
    except Exception as e:
        logging.exception(f"Error archiving {command} run: {e}")
        raise ArchiveError(f"could not archive {command} run: {e}") from e


def runs_for_hash(engine, config_hash: str) -> list[RunRecord]:
    with Session(engine) as session:
        return list(session.exec(select(RunRecord).where(RunRecord.config_hash == config_hash)).all())
