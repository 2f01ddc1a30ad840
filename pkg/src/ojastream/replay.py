"""Binary replay-stream files.

Layout (little-endian)::

    magic    4 bytes   b"OJST"
    version  u32       1
    d        u32
    count    u64
    flag     u8        0 = dense, d*d float64 per sample; 1 = rank one, d float64 (x, A = x x^T)
    samples  count * (d*d or d) float64
    [truth]  lambda1, lambda2 float64; v1 d float64; M, V float64   (optional)

Samples are memory-mapped on read, so replaying a file never loads it whole.
"""

import struct

import numpy as np

from .errors import ReplayFormatError
from .linalg import symmetrize
from .model import GroundTruth, ModelBounds, Replay

MAGIC = b"OJST"
VERSION = 1
HEADER = struct.Struct("<4sIIQB")
DENSE, RANK_ONE = 0, 1


def write_replay(path, data, rank_one=False, truth=None, bounds=None):
    data = np.ascontiguousarray(data, dtype="<f8")
    if rank_one and data.ndim != 2:
        raise ValueError("rank-one data must have shape (count, d)")
    if not rank_one and (data.ndim != 3 or data.shape[1] != data.shape[2]):
        raise ValueError("dense data must have shape (count, d, d)")
    if (truth is None) != (bounds is None):
        raise ValueError("ground truth and bounds are written together or not at all")
    count, d = data.shape[0], data.shape[1]
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, d, count, RANK_ONE if rank_one else DENSE))
        fh.write(data.tobytes())
        if truth is not None:
            block = np.r_[truth.lambda1, truth.lambda2, np.asarray(truth.v1, dtype=np.float64), bounds.m_bound, bounds.v_bound]
            fh.write(block.astype("<f8").tobytes())


def read_replay(path):
    with open(path, "rb") as fh:
        raw = fh.read(HEADER.size)
        fh.seek(0, 2)
        size = fh.tell()
    if len(raw) < HEADER.size:
        raise ReplayFormatError(f"{path}: truncated header")
    magic, version, d, count, flag = HEADER.unpack(raw)
    if magic != MAGIC:
        raise ReplayFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ReplayFormatError(f"{path}: unsupported version {version}")
    if flag not in (DENSE, RANK_ONE):
        raise ReplayFormatError(f"{path}: unknown sample flag {flag}")
    if d < 1 or count < 1:
        raise ReplayFormatError(f"{path}: empty stream (d={d}, count={count})")
    per = d if flag == RANK_ONE else d * d
    body = HEADER.size + 8 * per * count
    extra = size - body
    if extra not in (0, 8 * (d + 4)):
        raise ReplayFormatError(f"{path}: expected {body} or {body + 8 * (d + 4)} bytes, found {size}")
    shape = (count, d) if flag == RANK_ONE else (count, d, d)
    data = np.memmap(path, dtype="<f8", mode="r", offset=HEADER.size, shape=shape)
    truth = bounds = None
    if extra:
        block = np.fromfile(path, dtype="<f8", count=d + 4, offset=body)
        lam1, lam2, v1, m, v = block[0], block[1], block[2 : 2 + d], block[2 + d], block[3 + d]
        dense = Replay(data, rank_one=flag == RANK_ONE)
        truth = GroundTruth(symmetrize(dense.mean_matrix()), float(lam1), float(lam2), v1.copy())
        bounds = ModelBounds(float(m), float(v), float(lam1))
    return Replay(data, rank_one=flag == RANK_ONE, truth=truth, bounds=bounds)
