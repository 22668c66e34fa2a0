"""Structured run report.

Each pipeline stage is timed and written as one JSON object per line to
``report.jsonl``. Scalar logs can optionally be forwarded to wandb.
"""
import json
import os
import time
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional

from src.utils.common import to_jsonable


class RunReport:
    """Collects stage records of one run."""

    def __init__(
        self,
        output_dir: Optional[str] = None,
        wandb_project: Optional[str] = None,
        wandb_name: Optional[str] = None,
        verbose: bool = True,
    ) -> None:
        """Initialize RunReport.

        Args:
            output_dir: directory for report.jsonl; records stay in memory if None.
            wandb_project: enables wandb forwarding when set.
            wandb_name: wandb run name.
            verbose: print a one-line summary per stage.
        """
        self.records: List[Dict[str, Any]] = []
        self.verbose = verbose
        self.path = None
        if output_dir:
            os.makedirs(output_dir, exist_ok=True)
            self.path = os.path.join(output_dir, "report.jsonl")
        self._wandb = None
        if wandb_project:
            import wandb

            wandb.init(project=wandb_project, name=wandb_name, reinit=True)
            self._wandb = wandb

    def _emit(self, record: Dict[str, Any]) -> None:
        record = to_jsonable(record)
        self.records.append(record)
        if self.path:
            with open(self.path, "a") as f:
                f.write(json.dumps(record) + "\n")
        if self.verbose:
            fields = ", ".join(
                f"{k}: {v}" for k, v in record.items()
                if k not in ("stage", "seconds") and not isinstance(v, (list, dict))
            )
            print(f"[{record['stage']}] {record['seconds']:.3f}s {fields}".rstrip())

    @contextmanager
    def stage(self, name: str, **info: Any) -> Iterator[Dict[str, Any]]:
        """Time a pipeline stage; the yielded dict takes extra fields."""
        record: Dict[str, Any] = {"stage": name, **info}
        t0 = time.monotonic()
        try:
            yield record
        except Exception as e:
            record["error"] = f"{type(e).__name__}: {e}"
            record["seconds"] = time.monotonic() - t0
            self._emit(record)
            raise
        record["seconds"] = time.monotonic() - t0
        self._emit(record)

    def log(self, metrics: Dict[str, Any], step: Optional[int] = None) -> None:
        """Forward scalars to wandb when enabled."""
        if self._wandb is not None:
            self._wandb.log(to_jsonable(metrics), step=step)

    def close(self) -> None:
        if self._wandb is not None:
            self._wandb.finish()
            self._wandb = None
