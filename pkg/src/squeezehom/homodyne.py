"""Double-homodyne measurement record.

Each event is a pair of ideal quadrature outcomes taken with the local
oscillator phase at 0 and pi/2, so one event is a point ``(x, y)`` drawn from
the state's Wigner function.  For the Gaussian states handled here that is an
exact bivariate normal draw.

Batches are generated in fixed-size chunks.  Chunk ``k`` of a batch with seed
``s`` owns the generator ``PCG64(SeedSequence(s, spawn_key=(k,)))``, so the
output depends only on ``(state, n, seed)`` and not on how many workers
produced it.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegeneratePointError, InvalidArgumentError
from .gaussian import GaussianState

CHUNK_SIZE = 1 << 16
SEED_MASK = (1 << 64) - 1
SAMPLER_METHOD = (
    f"numpy {np.__version__} Generator(PCG64(SeedSequence(seed, spawn_key=(chunk,)))).standard_normal; "
    f"chunk={CHUNK_SIZE}; point = mean + cholesky(cov) @ z"
)


class SamplePoint(NamedTuple):
    """Outcomes of the quadrature pair measured at LO phases 0 and pi/2."""

    x: float
    y: float


def _seed_sequence(seed, *keys) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(k) for k in keys))


def derive_seed(seed, *keys) -> int:
    """Deterministic 64-bit sub-seed for the unit of work labelled by ``keys``."""
    return int(_seed_sequence(seed, *keys).generate_state(1, np.uint64)[0])


def make_rng(seed, *keys) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_seed_sequence(seed, *keys)))


def _cholesky(s: GaussianState) -> np.ndarray:
    return np.linalg.cholesky(s.cov)


def sample_pair(s: GaussianState, rng: np.random.Generator) -> SamplePoint:
    z = rng.standard_normal(2)
    pt = s.mean + _cholesky(s) @ z
    return SamplePoint(float(pt[0]), float(pt[1]))


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Seeded collection of double-homodyne events.

    ``points`` is a read-only ``(n, 2)`` array; iterating yields
    :class:`SamplePoint` values.
    """

    points: np.ndarray
    seed: int
    state: GaussianState
    method: str = field(default=SAMPLER_METHOD)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        for x, y in self.points:
            yield SamplePoint(float(x), float(y))

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def angles(self) -> np.ndarray:
        return polar_angles(self.points)

    def metadata(self) -> dict:
        return {"n": len(self), "seed": self.seed, "state": self.state.to_dict(), "sampler": self.method}


def _sample_chunk(s, chol, seed, chunk, size):
    z = make_rng(seed, chunk).standard_normal((size, 2))
    return s.mean + z @ chol.T


def sample_batch(s: GaussianState, n: int, seed: int, workers: int = 1) -> SampleBatch:
    """Draw ``n`` events; identical for identical ``(s, n, seed)`` whatever ``workers`` is."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"sample count must be a positive integer, got {n!r}")
    n = int(n)
    chol = _cholesky(s)
    sizes = [min(CHUNK_SIZE, n - start) for start in range(0, n, CHUNK_SIZE)]
    jobs = [(s, chol, seed, k, size) for k, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _sample_chunk(*job), jobs))
    else:
        parts = [_sample_chunk(*job) for job in jobs]
    points = np.concatenate(parts)
    points.setflags(write=False)
    return SampleBatch(points=points, seed=int(seed), state=s)


def polar_angle(pt) -> float:
    """Polar angle of ``pt`` in [-pi, pi); the origin is rejected."""
    x, y = float(pt[0]), float(pt[1])
    if x == 0.0 and y == 0.0:
        raise DegeneratePointError("polar angle undefined at the origin")
    phi = np.arctan2(y, x)
    return -np.pi if phi >= np.pi else float(phi)


def polar_angles(points) -> np.ndarray:
    """Vectorised :func:`polar_angle` over an ``(n, 2)`` array."""
    points = np.asarray(points, dtype=float)
    x, y = points[:, 0], points[:, 1]
    at_origin = (x == 0.0) & (y == 0.0)
    if np.any(at_origin):
        idx = int(np.flatnonzero(at_origin)[0])
        raise DegeneratePointError(f"polar angle undefined at the origin (point index {idx})")
    phi = np.arctan2(y, x)
    phi[phi >= np.pi] = -np.pi
    return phi


def write_samples_csv(batch: SampleBatch, path) -> None:
    np.savetxt(path, batch.points, fmt="%.17g", delimiter=",", header="x,y", comments="")


def read_samples_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["x", "y"]:
            raise InvalidArgumentError(f"unexpected sample header {header!r}")
        return np.array([[float(x), float(y)] for x, y in reader], dtype=float).reshape(-1, 2)
