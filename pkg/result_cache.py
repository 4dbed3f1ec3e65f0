"""
On-disk cache of rendered artifacts, keyed by subcommand and canonical config.
"""

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

from config import TOOL_VERSION

logger = logging.getLogger(__name__)


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def cache_key(subcommand: str, canonical: Dict[str, Any]) -> str:
    """sha256 over the subcommand and its canonical config."""
    body = canonical_json({'subcommand': subcommand, 'config': canonical})
    return hashlib.sha256(body.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class CacheEntry:
    key: str
    version: str
    payload: Dict[str, Any]

    def to_json(self) -> str:
        return canonical_json({'key': self.key, 'version': self.version, 'payload': self.payload})


class ResultCache:
    """
    Directory of <key>.json entries.
    Hits need an exact key and tool-version match; writes go to a temporary
    file in the same directory and are moved into place with os.replace.
    """

    def __init__(self, directory: str, version: str = TOOL_VERSION, enabled: bool = True):
        self.directory = Path(directory)
        self.version = version
        self.enabled = enabled

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> Optional[CacheEntry]:
        if not self.enabled:
            return None
        path = self._path(key)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError) as e:
            logger.warning("ignoring unreadable cache entry %s: %s", path, e)
            return None
        if data.get('key') != key or data.get('version') != self.version:
            logger.debug("cache entry %s is stale (version %s)", key[:12], data.get('version'))
            return None
        logger.debug("cache hit %s", key[:12])
        return CacheEntry(key, self.version, data['payload'])

    def put(self, key: str, payload: Dict[str, Any]) -> Optional[Path]:
        if not self.enabled:
            return None
        self.directory.mkdir(parents=True, exist_ok=True)
        entry = CacheEntry(key, self.version, payload)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=f".{key[:12]}-", suffix='.tmp')
        try:
            with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as f:
                f.write(entry.to_json())
            os.replace(tmp, self._path(key))
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        logger.debug("cached %s", key[:12])
        return self._path(key)
