import json
import threading
from datetime import datetime, timezone
from typing import Any, Dict, Optional

from bellcheck.config.settings import settings


class Auditor:
    """Append-only JSONL record of runs; a blank path disables it."""

    def __init__(self, path: Optional[str] = None):
        self.path = settings.audit_log if path is None else path
        self._lock = threading.Lock()

    @property
    def enabled(self) -> bool:
        return bool(self.path)

    def log(self, event: str, payload: Dict[str, Any]):
        if not self.enabled:
            return
        rec = {"ts": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"), "event": event, "payload": payload}
        line = json.dumps(rec, default=str)
        with self._lock, open(self.path, "a", encoding="utf-8") as f:
            f.write(line + "\n")
