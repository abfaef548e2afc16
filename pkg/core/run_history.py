"""Run history for the RankSpike CLI."""
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

import config

logger = logging.getLogger(__name__)


class RunHistory:
    """Keeps the last HISTORY_LIMIT CLI runs in the cache directory."""

    @staticmethod
    def path(cache_dir: Optional[Path] = None) -> Path:
        return Path(cache_dir or config.CACHE_DIR) / config.HISTORY_FILE

    @staticmethod
    def save_run(command: str, status: int, artifacts: List[str], error_code: Optional[str] = None,
                 cache_dir: Optional[Path] = None) -> None:
        """
        Append one run to the history.

        Args:
            command: Subcommand name
            status: Exit status
            artifacts: Files written by the run
            error_code: Machine-readable error code on failure
            cache_dir: Cache directory holding the history file
        """
        try:
            history = RunHistory.load_history(cache_dir)
            entry = {
                "timestamp": datetime.now().isoformat(),
                "command": command,
                "status": status,
                "error_code": error_code,
                "artifacts": [str(a) for a in artifacts],
            }
            history.append(entry)
            history = history[-config.HISTORY_LIMIT:]

            path = RunHistory.path(cache_dir)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, 'w') as f:
                json.dump(history, f, indent=2)
            logger.debug(f"Saved run to history: {entry}")
        except OSError as e:
            logger.error(f"Failed to save run history: {e}")

    @staticmethod
    def load_history(cache_dir: Optional[Path] = None) -> List[Dict]:
        path = RunHistory.path(cache_dir)
        try:
            if path.exists():
                with open(path, 'r') as f:
                    data = json.load(f)
                if isinstance(data, list):
                    return data
                logger.error(f"Run history at {path} is not a list; ignoring it")
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Failed to load run history: {e}")
        return []

    @staticmethod
    def get_stats(cache_dir: Optional[Path] = None) -> Dict:
        """Totals per command, failures and the time of the last run."""
        history = RunHistory.load_history(cache_dir)
        if not history:
            return {"total_runs": 0, "failed_runs": 0, "last_run": "Never", "by_command": {}}

        by_command: Dict[str, int] = {}
        for entry in history:
            name = entry.get("command", "unknown")
            by_command[name] = by_command.get(name, 0) + 1
        try:
            last_run = datetime.fromisoformat(history[-1]["timestamp"]).strftime("%Y-%m-%d %H:%M")
        except (KeyError, ValueError):
            last_run = "Unknown"
        return {
            "total_runs": len(history),
            "failed_runs": sum(1 for e in history if e.get("status", 0) != 0),
            "last_run": last_run,
            "by_command": by_command,
        }
