"""On-disk caches: integer traces a(p)·sqrt(p) (the expensive point counts)
and computed central values.

Trace cache layout (little-endian throughout):
    magic b"QTWC1\\n", one JSON header line (label, conductor, pmax, count),
    count int64 traces aligned with the primes <= pmax, sha256 of everything
    before it.

Central-value cache: one file per (curve label, tolerance), append-only
records ``<q d d I`` = (d signed 64-bit, value binary64, tail binary64,
truncation unsigned 32-bit), 28 bytes each.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct

import numpy as np

from . import _kernels
from .arith import sieve_primes
from .curve import CoefficientTable, CurveConfig, build_coefficients
from .errors import ConfigError

MAGIC = b"QTWC1\n"
LREC = struct.Struct("<qddI")

ENV_CACHE_DIR = "QUADTWIST_CACHE_DIR"


def default_cache_dir() -> str:
    return os.environ.get(ENV_CACHE_DIR, os.path.join(".cache", "quadtwist"))


def trace_cache_path(cache_dir: str, label: str) -> str:
    return os.path.join(cache_dir, f"traces_{label}.bin")


def save_traces(path: str, label: str, conductor: int, pmax: int, ap_int: np.ndarray) -> None:
    header = json.dumps(
        {"label": label, "conductor": conductor, "pmax": int(pmax), "count": len(ap_int)},
        sort_keys=True,
    ).encode() + b"\n"
    payload = MAGIC + header + ap_int.astype("<i8").tobytes()
    digest = hashlib.sha256(payload).digest()
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(payload)
        fh.write(digest)
    os.replace(tmp, path)


def load_traces(path: str):
    """(label, conductor, pmax, traces) or ConfigError on any corruption."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 32 or not blob.startswith(MAGIC):
        raise ConfigError(f"trace cache {path} has wrong magic")
    payload, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(payload).digest() != digest:
        raise ConfigError(f"trace cache {path} failed its checksum")
    nl = payload.index(b"\n", len(MAGIC))
    head = json.loads(payload[len(MAGIC) : nl + 1])
    ap = np.frombuffer(payload[nl + 1 :], dtype="<i8")
    if len(ap) != head["count"]:
        raise ConfigError(f"trace cache {path} truncated")
    return head["label"], head["conductor"], head["pmax"], ap.astype(np.int64)


def table_from_traces(cfg: CurveConfig, nmax: int, ap_int: np.ndarray, pmax: int) -> CoefficientTable:
    """Rebuild the full multiplicative table from cached prime traces."""
    primes = sieve_primes(max(pmax, 2)).primes
    if len(primes) != len(ap_int):
        raise ConfigError("trace cache inconsistent with its stated pmax")
    keep = primes <= nmax
    primes = primes[keep]
    ap = ap_int[keep]
    apn = ap / np.sqrt(primes.astype(np.float64))
    spf = _kernels.spf_sieve(nmax)
    a = _kernels.fill_multiplicative(nmax, spf, primes, apn, cfg.conductor)
    spf.setflags(write=False)
    return CoefficientTable(
        label=cfg.label,
        conductor=cfg.conductor,
        nmax=nmax,
        a=a,
        primes=primes,
        ap_int=ap,
        _spf=spf,
    )


def ensure_coefficients(cfg: CurveConfig, nmax: int, cache_dir: str | None = None) -> CoefficientTable:
    """Load the trace cache when it covers nmax; build/extend it otherwise.

    Corrupted caches are detected by checksum and silently rebuilt.  The
    file content is a pure function of (curve, pmax), so reruns reproduce
    identical bytes.
    """
    cache_dir = cache_dir or default_cache_dir()
    path = trace_cache_path(cache_dir, cfg.label)
    cached = None
    if os.path.exists(path):
        try:
            label, conductor, pmax, ap = load_traces(path)
            if label == cfg.label and conductor == cfg.conductor:
                cached = (pmax, ap)
        except (ConfigError, json.JSONDecodeError, ValueError):
            cached = None
    if cached is not None and cached[0] >= nmax:
        return table_from_traces(cfg, nmax, cached[1], cached[0])
    table = build_coefficients(cfg, nmax)
    save_traces(path, cfg.label, cfg.conductor, nmax, table.ap_int)
    return table


class LValueCache:
    """Append-only binary store of central values for one (label, tol).

    Single-writer/multi-reader: readers scan the record file; the writer
    appends and flushes record-atomically.
    """

    def __init__(self, cache_dir: str, label: str, tol: float):
        self.path = os.path.join(cache_dir, f"lvalues_{label}_{tol:.3e}.bin")
        self.tol = tol
        self._index = {}
        os.makedirs(cache_dir, exist_ok=True)
        if os.path.exists(self.path):
            with open(self.path, "rb") as fh:
                blob = fh.read()
            usable = len(blob) - len(blob) % LREC.size
            for off in range(0, usable, LREC.size):
                d, value, tail, T = LREC.unpack_from(blob, off)
                self._index[d] = (value, tail, T)
        self._fh = open(self.path, "ab")

    def __len__(self):
        return len(self._index)

    def __contains__(self, d):
        return d in self._index

    def get(self, d):
        return self._index.get(d)

    def put(self, d, value, tail, T):
        if d in self._index:
            return
        self._fh.write(LREC.pack(d, value, tail, T))
        self._index[d] = (value, tail, T)

    def flush(self):
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.flush()
        self.close()
