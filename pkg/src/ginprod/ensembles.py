"""Monte Carlo sampling of the product process and a binary trajectory format."""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .process import ConfigError, Ginibre, GinibreSource, NumericalError, ProcessSpec, TruncatedUnitary

MAGIC = b"GPTRAJ01"
_HEADER = struct.Struct("<8sII32sQQ")


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream: identical (seed, stream_id) gives identical draws."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        if not (0 <= self.seed < 2 ** 64 and 0 <= self.stream_id < 2 ** 64):
            raise ConfigError("seed and stream_id must be unsigned 64-bit integers")
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def standard_complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Box-Muller from uniform doubles: real and imaginary parts N(0, 1/2)."""
    shape = tuple(np.atleast_1d(shape))
    u = rng.random((2,) + shape)
    radius = np.sqrt(-np.log1p(-u[0]))          # 1 - u in (0, 1]
    angle = 2.0 * np.pi * u[1]
    return radius * (np.cos(angle) + 1j * np.sin(angle))


def sample_ginibre(rows: int, cols: int, rng: np.random.Generator, batch: int | None = None) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ConfigError("matrix dimensions must be positive")
    shape = (rows, cols) if batch is None else (batch, rows, cols)
    return standard_complex_normal(rng, shape)


def haar_unitary(l: int, rng: np.random.Generator, batch: int | None = None) -> np.ndarray:
    """QR of a Ginibre draw with the phases of R's diagonal divided out."""
    z = sample_ginibre(l, l, rng, batch)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def sample_truncated_unitary(l: int, rows: int, cols: int, rng: np.random.Generator,
                             batch: int | None = None) -> np.ndarray:
    if not l >= rows >= cols >= 1:
        raise ConfigError("need l >= rows >= cols >= 1")
    return haar_unitary(l, rng, batch)[..., :rows, :cols]


def source_matrix(spec: ProcessSpec) -> np.ndarray:
    """Q with squared singular values q_j: diag(sqrt q) in the top n x n block."""
    n, N1 = spec.n, spec.n + spec.nu[1]
    Q = np.zeros((N1, n), dtype=complex)
    Q[np.arange(n), np.arange(n)] = np.sqrt(np.asarray(spec.initial.q, dtype=float))
    return Q


def sample_source(spec: ProcessSpec, rng: np.random.Generator, batch: int | None = None) -> np.ndarray:
    if not isinstance(spec.initial, GinibreSource):
        raise ConfigError("spec does not describe a Ginibre-with-source start")
    return sample_ginibre(spec.n + spec.nu[1], spec.n, rng, batch) + source_matrix(spec)


def sample_initial(spec: ProcessSpec, rng, batch=None) -> np.ndarray:
    init = spec.initial
    rows = spec.n + spec.nu[1]
    if isinstance(init, Ginibre):
        return sample_ginibre(rows, spec.n, rng, batch)
    if isinstance(init, TruncatedUnitary):
        return sample_truncated_unitary(init.l, rows, spec.n, rng, batch)
    return sample_source(spec, rng, batch)


def _sv_sq(X) -> np.ndarray:
    try:
        s = np.linalg.svd(X, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return s ** 2


def sample_batch(spec: ProcessSpec, count: int, stream: RngStream) -> np.ndarray:
    """Array (count, m, n): descending squared singular values of G_k...G_1."""
    if count < 1:
        raise ConfigError("count must be positive")
    rng = stream.generator()
    X = sample_initial(spec, rng, count)
    out = np.empty((count, spec.m, spec.n))
    out[:, 0] = _sv_sq(X)
    for k in range(2, spec.m + 1):
        G = sample_ginibre(spec.n + spec.nu[k], spec.n + spec.nu[k - 1], rng, count)
        X = G @ X
        out[:, k - 1] = _sv_sq(X)
    return out


CHUNK = 50_000


def sample_campaign(spec: ProcessSpec, count: int, seed: int, chunk: int = CHUNK,
                    workers: int = 1) -> np.ndarray:
    """``count`` trajectories drawn in fixed-size chunks, chunk k from stream k.

    The result depends only on (spec, count, seed, chunk), not on ``workers``.
    """
    if count < 1:
        raise ConfigError("count must be positive")
    sizes = [min(chunk, count - k) for k in range(0, count, chunk)]
    jobs = [(size, RngStream(seed, k)) for k, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: sample_batch(spec, *j), jobs))
    else:
        parts = [sample_batch(spec, *j) for j in jobs]
    return np.concatenate(parts, axis=0)


def sample_trajectory(spec: ProcessSpec, rng_or_stream) -> np.ndarray:
    """One trajectory, shape (m, n)."""
    if isinstance(rng_or_stream, RngStream):
        return sample_batch(spec, 1, rng_or_stream)[0]
    rng = rng_or_stream
    X = sample_initial(spec, rng)
    rows = [_sv_sq(X)]
    for k in range(2, spec.m + 1):
        X = sample_ginibre(spec.n + spec.nu[k], spec.n + spec.nu[k - 1], rng) @ X
        rows.append(_sv_sq(X))
    return np.array(rows)


def write_batch(path, spec: ProcessSpec, seed: int, batch: np.ndarray) -> None:
    """Header (magic, n, m, spec sha256, seed, count) then little-endian float64,
    row-major (trajectory, time, index)."""
    batch = np.asarray(batch, dtype="<f8")
    count, m, n = batch.shape
    if (m, n) != (spec.m, spec.n):
        raise ConfigError("batch shape does not match the process (m, n)")
    head = _HEADER.pack(MAGIC, n, m, spec.digest(), seed, count)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(batch).tobytes())


def read_batch(path, spec: ProcessSpec | None = None):
    """Returns (batch, header dict); checks the process digest when ``spec`` is given."""
    data = Path(path).read_bytes()
    magic, n, m, digest, seed, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ConfigError("not a trajectory batch file")
    if spec is not None and digest != spec.digest():
        raise ConfigError("trajectory file was produced for a different spec")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != count * m * n:
        raise ConfigError("truncated trajectory file")
    return body.reshape(count, m, n).copy(), {"n": n, "m": m, "digest": digest.hex(), "seed": seed,
                                                "count": count}


def batch_digest(batch: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(batch, dtype="<f8").tobytes()).hexdigest()
