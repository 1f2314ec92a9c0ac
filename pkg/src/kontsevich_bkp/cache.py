"""On-disk cache of Q-function coefficients.

One JSON file per (partition, cutoff) under a directory named after the
Q-function convention version.  Readers take a shared ``flock`` on the
directory lock file, writers an exclusive one; files are replaced atomically.
"""
from __future__ import annotations

import contextlib
import fcntl
import json
import os
import tempfile
from pathlib import Path

from .algebra import OddPolynomial, StrictPartition

CONVENTION_VERSION = "qschur-exp2t-v1"
ENV_VAR = "KONTSEVICH_BKP_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "kontsevich_bkp"


class QCache:
    def __init__(self, root: str | os.PathLike | None = None, convention: str = CONVENTION_VERSION):
        self.root = Path(root) if root is not None else default_cache_dir()
        self.convention = convention

    @property
    def directory(self) -> Path:
        return self.root / self.convention

    @contextlib.contextmanager
    def _lock(self, exclusive: bool):
        self.directory.mkdir(parents=True, exist_ok=True)
        with open(self.directory / ".lock", "a+") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX if exclusive else fcntl.LOCK_SH)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    @staticmethod
    def key(partition: StrictPartition, cutoff: int, family: str = "t") -> str:
        parts = "-".join(map(str, partition.parts)) or "empty"
        return f"q_{parts}_c{cutoff}_{family}.json"

    def get(self, partition: StrictPartition, cutoff: int, family: str = "t") -> OddPolynomial | None:
        path = self.directory / self.key(partition, cutoff, family)
        if not path.exists():
            return None
        with self._lock(exclusive=False):
            try:
                data = json.loads(path.read_text())
            except FileNotFoundError:
                return None
        if data.get("convention") != self.convention:
            return None
        return OddPolynomial.from_dict(data["polynomial"])

    def put(self, partition: StrictPartition, cutoff: int, poly: OddPolynomial, family: str = "t") -> Path:
        payload = {
            "convention": self.convention,
            "partition": list(partition.parts),
            "cutoff": cutoff,
            "polynomial": poly.to_dict(),
        }
        text = json.dumps(payload, separators=(",", ":"), sort_keys=True)
        path = self.directory / self.key(partition, cutoff, family)
        with self._lock(exclusive=True):
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
        return path

    def entries(self) -> list[Path]:
        if not self.directory.exists():
            return []
        return sorted(self.directory.glob("q_*.json"))

    def stat(self) -> dict:
        files = self.entries()
        return {
            "directory": str(self.directory),
            "convention": self.convention,
            "entries": len(files),
            "bytes": sum(f.stat().st_size for f in files),
        }

    def clear(self) -> int:
        """Remove this convention's entries; other conventions are left alone."""
        files = self.entries()
        if not files:
            return 0
        with self._lock(exclusive=True):
            for f in files:
                f.unlink(missing_ok=True)
        return len(files)
