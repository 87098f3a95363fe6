"""
Structured run log embedded in CLI reports.
"""

import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any

logger = logging.getLogger(__name__)

MAX_ENTRIES = 100


@dataclass
class RunLog:
    """
    Timestamped entries mirrored to the module logger.

    Entries carry wall-clock time only when timestamps is set, so reports
    stay byte-identical across runs by default.
    """
    timestamps: bool = False
    entries: list[dict[str, Any]] = field(default_factory=list)

    def add(self, level: str, message: str, details: str = "") -> None:
        """Add a log entry."""
        entry = {"level": level, "message": message, "details": details}
        if self.timestamps:
            entry = {"timestamp": datetime.now().isoformat(), **entry}
        self.entries.append(entry)
        # Keep only the last MAX_ENTRIES
        if len(self.entries) > MAX_ENTRIES:
            self.entries = self.entries[-MAX_ENTRIES:]
        logger.log(getattr(logging, level.upper(), logging.INFO), f"{message}" + (f": {details}" if details else ""))

    def to_list(self) -> list[dict[str, Any]]:
        return list(self.entries)
