"""Checksum-verified dataset fetching into a local cache.

A manifest is a JSON list (or ``{"datasets": [...]}``) of entries
``{"name": ..., "url": ..., "sha256": ...}``. ``file://`` URLs work, which is
how the tests exercise this without a network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import shutil
import tempfile
import urllib.request
from dataclasses import dataclass
from pathlib import Path

from .errors import ChecksumMismatch, ConfigError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    url: str
    sha256: str

    @property
    def filename(self) -> str:
        return f"{self.name}.csv"


def load_manifest(path) -> list[ManifestEntry]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if isinstance(data, dict):
        data = data.get("datasets", [])
    entries = []
    for i, item in enumerate(data):
        if not isinstance(item, dict) or set(item) != {"name", "url", "sha256"}:
            raise ConfigError(f"manifest entry {i} must have exactly the keys name, url, sha256")
        entries.append(ManifestEntry(str(item["name"]), str(item["url"]), str(item["sha256"]).lower()))
    return entries


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def fetch(entries, cache_dir, offline: bool = False, timeout: float = 60.0) -> dict[str, Path]:
    """Ensure every manifest entry is in ``cache_dir`` with a matching checksum.

    Cached files are re-verified. With ``offline=True`` nothing is downloaded
    and a missing file raises ``FileNotFoundError``.
    """
    cache = Path(cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    out = {}
    for entry in entries:
        target = cache / entry.filename
        if target.is_file():
            digest = sha256_of(target)
            if digest != entry.sha256:
                raise ChecksumMismatch(f"cached {target} has sha256 {digest}, manifest says {entry.sha256}")
            out[entry.name] = target
            continue
        if offline:
            raise FileNotFoundError(f"{entry.name}: not in cache {cache} and --offline forbids downloading")
        log.info("downloading %s from %s", entry.name, entry.url)
        with tempfile.NamedTemporaryFile(dir=cache, delete=False) as tmp:
            tmp_path = Path(tmp.name)
            try:
                with urllib.request.urlopen(entry.url, timeout=timeout) as resp:
                    shutil.copyfileobj(resp, tmp)
            except Exception:
                tmp.close()
                tmp_path.unlink(missing_ok=True)
                raise
        digest = sha256_of(tmp_path)
        if digest != entry.sha256:
            tmp_path.unlink(missing_ok=True)
            raise ChecksumMismatch(f"{entry.name}: downloaded sha256 {digest} != manifest {entry.sha256}")
        tmp_path.replace(target)
        out[entry.name] = target
    return out
