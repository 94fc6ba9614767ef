"""
On-disk moment tables.

File layout, little-endian throughout:

    magic     8 bytes   b"AXMOMENT"
    version   uint32
    r_max     float64
    n_i       int64
    n_d       int64
    F         int64
    k         float64
    digest    32 bytes  sha256 of the payload
    payload   alpha, beta, gamma as float64, each C-ordered (n_i, n_d + 1, F + 1, n_d)
"""
import hashlib
import os
import struct
from pathlib import Path
from typing import Optional

import numpy as np
from loguru import logger

from persistent.model.radial import MomentTable
from utils.errors import MomentCacheError

MAGIC = b"AXMOMENT"
VERSION = 1
_HEADER = struct.Struct("<8sIdqqqd32s")
_DTYPE = np.dtype("<f8")


class MomentCacheRepository:
    def __init__(self, cache_dir: Optional[str] = None) -> None:
        self.cache_dir = Path(cache_dir) if cache_dir else None

    def path_for(self, r_max: float, n_i: int, n_d: int, F: int, k: float) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        key = struct.pack("<dqqqd", r_max, n_i, n_d, F, k)
        return self.cache_dir / f"moments_{hashlib.sha256(key).hexdigest()[:20]}.bin"

    def save(self, table: MomentTable) -> Optional[Path]:
        path = self.path_for(table.r_max, table.n_i, table.n_d, table.F, table.k)
        if path is None:
            return None
        payload = b"".join(
            np.ascontiguousarray(a, dtype=_DTYPE).tobytes() for a in (table.alpha, table.beta, table.gamma)
        )
        header = _HEADER.pack(
            MAGIC, VERSION, table.r_max, table.n_i, table.n_d, table.F, table.k, hashlib.sha256(payload).digest()
        )
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(header + payload)
        os.replace(tmp, path)
        logger.info("moment cache written {}", path)
        return path

    def load(self, r_max: float, n_i: int, n_d: int, F: int, k: float) -> Optional[MomentTable]:
        """
        None when caching is off or the file is absent; MomentCacheError when the file
        does not match the requested parameters or its digest.
        """
        path = self.path_for(r_max, n_i, n_d, F, k)
        if path is None or not path.exists():
            return None
        return self.read(path, (r_max, n_i, n_d, F, k))

    def read(self, path: Path, expected: Optional[tuple] = None) -> MomentTable:
        try:
            data = path.read_bytes()
        except OSError as e:
            raise MomentCacheError(f"{path}: {e}") from e
        if len(data) < _HEADER.size:
            raise MomentCacheError(f"{path}: truncated header")
        magic, version, r_max, n_i, n_d, F, k, digest = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise MomentCacheError(f"{path}: not a moment cache file")
        if version != VERSION:
            raise MomentCacheError(f"{path}: version {version}, expected {VERSION}")
        if expected is not None and (r_max, n_i, n_d, F, k) != tuple(expected):
            raise MomentCacheError(f"{path}: parameters {(r_max, n_i, n_d, F, k)} differ from {expected}")
        payload = data[_HEADER.size:]
        if hashlib.sha256(payload).digest() != digest:
            raise MomentCacheError(f"{path}: payload digest mismatch")
        shape = (n_i, n_d + 1, F + 1, n_d)
        size = int(np.prod(shape))
        if len(payload) != 3 * size * _DTYPE.itemsize:
            raise MomentCacheError(f"{path}: payload size {len(payload)} does not match {shape}")
        flat = np.frombuffer(payload, dtype=_DTYPE).astype(np.float64)
        alpha, beta, gamma = (flat[i * size : (i + 1) * size].reshape(shape) for i in range(3))
        return MomentTable(r_max=r_max, n_i=n_i, n_d=n_d, F=F, k=k, alpha=alpha, beta=beta, gamma=gamma)
