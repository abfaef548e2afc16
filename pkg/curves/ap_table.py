"""a(p) tables with a persistent binary cache."""
import logging
import os
import struct
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

import config
from arith.primes import iter_prime_segments
from core.errors import CacheError, DependencyError, ValidationError
from curves.point_count import ap_bad, ap_good
from curves.weierstrass import WeierstrassCurve

logger = logging.getLogger(__name__)

_MAGIC = b"RSAP"
_HEADER = struct.Struct("<4sHH16sqq")


@dataclass(frozen=True)
class APTable:
    """a(p) for every prime p <= bound, with the bad-prime mask."""

    curve_id: str
    bound: int
    primes: np.ndarray
    values: np.ndarray
    bad: np.ndarray

    def __post_init__(self):
        for arr in (self.primes, self.values, self.bad):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return int(self.primes.size)

    def _index(self, p: int) -> int:
        i = int(np.searchsorted(self.primes, p))
        if i >= self.primes.size or int(self.primes[i]) != p:
            if p > self.bound:
                raise DependencyError(f"a({p}) missing: table for {self.curve_id} stops at {self.bound}")
            raise KeyError(p)
        return i

    def __getitem__(self, p: int) -> int:
        return int(self.values[self._index(p)])

    def is_bad(self, p: int) -> bool:
        return bool(self.bad[self._index(p)])

    def as_dict(self) -> Dict[int, int]:
        return dict(zip(self.primes.tolist(), self.values.tolist()))

    def truncate(self, x: float) -> "APTable":
        k = int(np.searchsorted(self.primes, x, side='right'))
        return APTable(self.curve_id, int(x), self.primes[:k].copy(),
                       self.values[:k].copy(), self.bad[:k].copy())

    def require(self, x: float) -> None:
        if x > self.bound:
            raise DependencyError(
                f"a(p) table for {self.curve_id} covers p <= {self.bound}, need p <= {int(x)}")

    def hasse_violations(self) -> List[int]:
        """Primes whose a(p) breaks |a(p)| <= floor(2 sqrt p) (good) or {-1,0,1} (bad)."""
        p = self.primes
        limit = np.floor(2 * np.sqrt(p.astype(np.float64))).astype(np.int64)
        good_bad = ~self.bad & (np.abs(self.values) > limit)
        bad_bad = self.bad & (np.abs(self.values) > 1)
        return p[good_bad | bad_bad].tolist()


class APCache:
    """Binary (p, a(p)) cache keyed by curve hash."""

    @staticmethod
    def path_for(curve: WeierstrassCurve, cache_dir: Path) -> Path:
        return Path(cache_dir) / f"ap_{curve.curve_hash}.bin"

    @staticmethod
    def save(curve: WeierstrassCurve, primes: np.ndarray, values: np.ndarray,
             bound: int, cache_dir: Path) -> Path:
        """
        Write the cache atomically.

        Args:
            curve: Curve the table belongs to
            primes: Ascending primes
            values: a(p) aligned with primes
            bound: Bound the table is complete to
            cache_dir: Directory holding cache files

        Returns:
            Path of the cache file
        """
        path = APCache.path_for(curve, cache_dir)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = _HEADER.pack(_MAGIC, config.AP_CACHE_VERSION, 0,
                              curve.curve_hash.encode(), bound, primes.size)
        body = np.column_stack([primes, values]).astype('<i8').tobytes()
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, 'wb') as f:
                f.write(header)
                f.write(body)
            os.replace(tmp, path)
        except Exception:
            Path(tmp).unlink(missing_ok=True)
            raise
        logger.info(f"Saved a(p) cache for {curve.name} to {path} (bound {bound})")
        return path

    @staticmethod
    def load(curve: WeierstrassCurve, cache_dir: Path) -> Optional[tuple]:
        """Return (bound, primes, values) or None; corrupt files raise CacheError."""
        path = APCache.path_for(curve, cache_dir)
        if not path.exists():
            return None
        data = path.read_bytes()
        if len(data) < _HEADER.size:
            raise CacheError(f"{path}: truncated header")
        magic, version, _, digest, bound, count = _HEADER.unpack_from(data)
        if magic != _MAGIC or version != config.AP_CACHE_VERSION:
            raise CacheError(f"{path}: bad magic or version {version}")
        if digest.decode() != curve.curve_hash:
            raise CacheError(f"{path}: curve hash mismatch")
        body = data[_HEADER.size:]
        if len(body) != 16 * count:
            raise CacheError(f"{path}: expected {count} records, found {len(body) // 16}")
        pairs = np.frombuffer(body, dtype='<i8').reshape(count, 2)
        primes = pairs[:, 0].astype(np.int64)
        if count and (np.any(np.diff(primes) <= 0) or primes[-1] > bound):
            raise CacheError(f"{path}: records out of order")
        return bound, primes, pairs[:, 1].astype(np.int64)


def _ap_chunk(curve: WeierstrassCurve, primes: List[int], bad: List[bool],
              accelerate: bool, threshold: int) -> List[int]:
    return [ap_bad(curve, p) if is_bad else ap_good(curve, p, accelerate, threshold)
            for p, is_bad in zip(primes, bad)]


def _compute(curve: WeierstrassCurve, lo: int, hi: int, accelerate: bool,
             threshold: int, parallelism: int, show_progress: bool):
    """(primes, values) for primes in [lo, hi]."""
    segments = list(iter_prime_segments(lo, hi + 1))
    primes = np.concatenate(segments) if segments else np.zeros(0, dtype=np.int64)
    if primes.size == 0:
        return primes, np.zeros(0, dtype=np.int64)
    bad = curve.bad_mask(primes)
    step = config.AP_CHUNK_PRIMES
    chunks = [(primes[i:i + step].tolist(), bad[i:i + step].tolist())
              for i in range(0, primes.size, step)]
    results: List[List[int]] = []

    progress = None
    if show_progress:
        from rich.progress import Progress
        progress = Progress()
        task = progress.add_task(f"a(p) for {curve.name}", total=len(chunks))
        progress.start()
    try:
        if parallelism > 1:
            with ProcessPoolExecutor(max_workers=parallelism) as pool:
                futures = [pool.submit(_ap_chunk, curve, ps, bs, accelerate, threshold)
                           for ps, bs in chunks]
                for fut in futures:
                    results.append(fut.result())
                    if progress:
                        progress.advance(task)
        else:
            for ps, bs in chunks:
                results.append(_ap_chunk(curve, ps, bs, accelerate, threshold))
                if progress:
                    progress.advance(task)
    finally:
        if progress:
            progress.stop()
    values = np.array([a for chunk in results for a in chunk], dtype=np.int64)
    return primes, values


def ap_table(curve: WeierstrassCurve, X: int, cache_dir: Optional[Path] = None,
             accelerate: bool = False, threshold: int = config.BSGS_THRESHOLD,
             parallelism: int = 1, show_progress: Optional[bool] = None) -> APTable:
    """
    Complete a(p) table for p <= X, reusing and extending the on-disk cache.

    Args:
        curve: Minimal Weierstrass model
        X: Bound (>= 2)
        cache_dir: Cache directory; None disables persistence
        accelerate: Use baby-step/giant-step above threshold
        threshold: Prime above which the accelerator applies
        parallelism: Worker processes (1 = in-process)
        show_progress: Force the progress bar on or off

    Returns:
        APTable for p <= X
    """
    if X < 2:
        raise ValidationError(f"a(p) bound must be >= 2, got {X}")
    X = int(X)

    cached = None
    if cache_dir is not None:
        try:
            cached = APCache.load(curve, cache_dir)
        except CacheError as e:
            logger.warning(f"Discarding corrupt a(p) cache, rebuilding: {e}")
            cached = None
        if cached:
            logger.info(f"a(p) cache hit for {curve.name}: bound {cached[0]}")

    if cached and cached[0] >= X:
        _, primes, values = cached
    else:
        start = 2
        old_primes = np.zeros(0, dtype=np.int64)
        old_values = np.zeros(0, dtype=np.int64)
        if cached:
            cached_bound, old_primes, old_values = cached
            start = cached_bound + 1
        if show_progress is None:
            show_progress = (X - start) > config.PROGRESS_MIN_ITEMS * 20
        logger.info(f"Computing a(p) for {curve.name} on [{start}, {X}]")
        new_primes, new_values = _compute(curve, start, X, accelerate, threshold,
                                          parallelism, show_progress)
        primes = np.concatenate([old_primes, new_primes])
        values = np.concatenate([old_values, new_values])
        if cache_dir is not None:
            APCache.save(curve, primes, values, X, cache_dir)

    k = int(np.searchsorted(primes, X, side='right'))
    primes, values = primes[:k].copy(), values[:k].copy()
    table = APTable(curve.curve_hash, X, primes, values, curve.bad_mask(primes))
    violations = table.hasse_violations()
    if violations:
        raise ValidationError(f"Hasse bound violated for {curve.name} at p = {violations[:5]}")
    return table
