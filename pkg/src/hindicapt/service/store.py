"""Append-only JSON-lines persistence, one file per session.

Every acknowledged attempt and rating is flushed to disk before the response
goes out, so a restart loses nothing. Writes to one session are serialized
through a per-session lock; reads re-scan the files (the store is small and
the practice tool single-tenant).
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from ..stats import PairedSample


class SessionStore:
    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir) / "sessions"
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def _path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.jsonl"

    def append(self, session_id: str, record: dict) -> None:
        line = json.dumps(record, ensure_ascii=False, sort_keys=True)
        with self._lock_for(session_id):
            with open(self._path(session_id), "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def load(self, session_id: str) -> list[dict]:
        path = self._path(session_id)
        if not path.exists():
            return []
        records = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(json.loads(line))
        return records

    def all_ratings(self) -> list[PairedSample]:
        """Ratings across every stored session, in file order."""
        samples: list[PairedSample] = []
        for path in sorted(self.root.glob("*.jsonl")):
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                if rec.get("type") == "rating":
                    samples.append(
                        PairedSample(
                            participant_id=rec["session_id"],
                            phoneme=rec["phoneme"],
                            pre=rec["pre"],
                            post=rec["post"],
                        )
                    )
        return samples
