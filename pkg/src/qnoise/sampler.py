"""Discretize kernel decompositions into covariance matrices and draw sample paths.

Deltas discretize as 1/dt on the diagonal (box-function limit, preserves the
kernel's integral on the grid); delta'' uses the symmetric second-difference
operator -D1^T D1 scaled by 1/dt^3, whose quadratic form is exactly
-(1/dt^3) sum (x_{i+1}-x_i)^2, so a negative delta'' coefficient contributes
a positive-semidefinite piece, matching the continuum spectral density
S(W) = -delta2_coeff W^2 >= 0.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FactorizationFailure, GridTooCoarse, RangeError, UnitMismatch
from .kernels import KernelDecomposition
from .params import OscillatorParams

__all__ = [
    "TimeGrid",
    "CovarianceMatrix",
    "SamplingFactor",
    "SamplePath",
    "assemble_covariance",
    "factorize",
    "sample_paths",
    "sample_thermal_white",
    "write_covariance_dump",
    "read_covariance_dump",
]

COVARIANCE_MAGIC = b"QNCOV001"

#: grid must put at least this many points per fastest kernel period
GRID_RESOLUTION_FRACTION = 0.1


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t_i = t_start + i dt, i = 0..n_steps-1."""

    t_start: float
    dt: float
    n_steps: int

    def __post_init__(self):
        if self.dt <= 0:
            raise RangeError("grid dt must be > 0")
        if self.n_steps < 1:
            raise RangeError("grid needs at least one step")

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps)

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt * (self.n_steps - 1)

    def check_resolves(self, omega_max: float):
        if omega_max > 0 and self.dt > GRID_RESOLUTION_FRACTION * 2.0 * math.pi / omega_max:
            raise GridTooCoarse(
                f"dt = {self.dt:.3g} s does not resolve omega = {omega_max:.3g} rad/s "
                f"(need dt <= {GRID_RESOLUTION_FRACTION * 2 * math.pi / omega_max:.3g})")


@dataclass(frozen=True)
class CovarianceMatrix:
    """Dense symmetric covariance on a grid, with the kernels it was summed from."""

    grid: TimeGrid
    matrix: np.ndarray
    units: str
    provenance: tuple = ()

    def max_diagonal(self) -> float:
        return float(np.max(np.diag(self.matrix)))


@dataclass(frozen=True)
class SamplingFactor:
    """Lower-triangular factor with L L^T = C + jitter I."""

    grid: TimeGrid
    L: np.ndarray
    jitter: float
    units: str


@dataclass(frozen=True)
class SamplePath:
    """One realization on a grid; units N for forces, m for positions."""

    grid: TimeGrid
    values: np.ndarray
    units: str = "N"

    def __post_init__(self):
        if len(self.values) != self.grid.n_steps:
            raise RangeError("path length does not match its grid")


def _second_difference(n: int) -> np.ndarray:
    """-D1^T D1: tridiagonal (1, -2, 1) with -1 corners; exactly NSD."""
    A = np.zeros((n, n))
    idx = np.arange(n)
    A[idx, idx] = -2.0
    A[0, 0] = A[-1, -1] = -1.0
    A[idx[:-1], idx[:-1] + 1] = 1.0
    A[idx[1:], idx[1:] - 1] = 1.0
    return A


def assemble_covariance(kernels, grid: TimeGrid) -> CovarianceMatrix:
    """Sum kernel decompositions into a dense covariance matrix on the grid.

    C[i,j] = sum_k smooth_k(t_i, t_j) + (delta_coeff/dt) [i==j]
             + delta2_coeff * (-D1^T D1)[i,j] / dt^3
    """
    kernels = list(kernels)
    if not kernels:
        raise RangeError("assemble_covariance needs at least one kernel")
    units = kernels[0].units
    if any(k.units != units for k in kernels):
        raise UnitMismatch("kernels with different units cannot be summed")
    omega_max = max(k.omega_max for k in kernels)
    grid.check_resolves(omega_max)

    t = grid.times()
    n = grid.n_steps
    C = np.zeros((n, n))
    for k in kernels:
        if k.terms:
            C += k.smooth(t[:, None], t[None, :])
        if k.delta_coeff:
            C[np.arange(n), np.arange(n)] += k.delta_coeff / grid.dt
        if k.delta2_coeff:
            C += k.delta2_coeff / grid.dt ** 3 * _second_difference(n)
    C = 0.5 * (C + C.T)  # kill accumulation asymmetry at machine level
    return CovarianceMatrix(grid=grid, matrix=C, units=units,
                            provenance=tuple(kernels))


#: factorization fails if the required jitter exceeds this times max(diag)
JITTER_CAP_RELATIVE = 1e-6
BASE_JITTER_RELATIVE = 1e-12


def factorize(cov: CovarianceMatrix) -> SamplingFactor:
    """Cholesky factor of C + jitter I.

    jitter = max(0, -lambda_min) + 1e-12 max(diag); lambda_min is only
    computed when the base jitter is insufficient. Raises
    FactorizationFailure when the needed jitter exceeds 1e-6 max(diag),
    which signals a badly discretized kernel.
    """
    C = cov.matrix
    if not np.allclose(C, C.T, rtol=0.0, atol=1e-12 * max(cov.max_diagonal(), 1e-300)):
        raise FactorizationFailure("covariance is not symmetric")
    scale = cov.max_diagonal()
    base = BASE_JITTER_RELATIVE * scale
    try:
        L = np.linalg.cholesky(C + base * np.eye(len(C)))
        return SamplingFactor(grid=cov.grid, L=L, jitter=base, units=cov.units)
    except np.linalg.LinAlgError:
        pass
    lam_min = float(np.linalg.eigvalsh(C)[0])
    jitter = max(0.0, -lam_min) + base
    if jitter > JITTER_CAP_RELATIVE * scale:
        raise FactorizationFailure(
            f"covariance needs jitter {jitter:.3g} > {JITTER_CAP_RELATIVE:g} * max(diag) "
            f"= {JITTER_CAP_RELATIVE * scale:.3g}; kernel discretization is unsound")
    L = np.linalg.cholesky(C + jitter * np.eye(len(C)))
    return SamplingFactor(grid=cov.grid, L=L, jitter=jitter, units=cov.units)


def _normals(seed: int, count: int, n: int) -> np.ndarray:
    """(n, count) standard normals from per-path Philox substreams.

    Each path gets its own child of SeedSequence(seed), so the output is a
    pure function of (seed, count, n) and independent of any worker layout.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    out = np.empty((n, count))
    for j, child in enumerate(children):
        gen = np.random.Generator(np.random.Philox(child))
        out[:, j] = gen.standard_normal(n)
    return out


def sample_paths(factor: SamplingFactor, count: int, seed: int) -> list[SamplePath]:
    """Draw `count` Gaussian paths with covariance L L^T; bit-reproducible."""
    if count < 1:
        raise RangeError("count must be >= 1")
    n = factor.grid.n_steps
    z = _normals(seed, count, n)
    paths = factor.L @ z
    return [SamplePath(grid=factor.grid, values=np.ascontiguousarray(paths[:, j]),
                       units=factor.units)
            for j in range(count)]


def sample_thermal_white(osc: OscillatorParams, grid: TimeGrid, count: int,
                         seed: int) -> list[SamplePath]:
    """White thermal force: i.i.d. normals with variance 2 Gamma_m kB T / dt.

    Gamma_m = 2 m gamma_m is the momentum damping coefficient, so the Langevin
    equation m qdd + Gamma_m qd + m w^2 q = eta reaches equipartition.
    """
    from .params import CODATA
    if count < 1:
        raise RangeError("count must be >= 1")
    Gamma_m = 2.0 * osc.mass * osc.damping_rate
    var = 2.0 * Gamma_m * CODATA.kB * osc.bath_temperature / grid.dt
    z = _normals(seed, count, grid.n_steps)
    values = math.sqrt(var) * z
    return [SamplePath(grid=grid, values=np.ascontiguousarray(values[:, j]), units="N")
            for j in range(count)]


# --------------------------------------------------------------------------
# Binary covariance dump (row-major float64, little-endian)
# --------------------------------------------------------------------------

def write_covariance_dump(cov: CovarianceMatrix, path):
    with open(path, "wb") as fh:
        fh.write(COVARIANCE_MAGIC)
        fh.write(struct.pack("<Q", len(cov.matrix)))
        fh.write(np.ascontiguousarray(cov.matrix, dtype="<f8").tobytes())


def read_covariance_dump(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != COVARIANCE_MAGIC:
            raise RangeError(f"bad covariance dump magic {magic!r}")
        (n,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8")
    return data.reshape(n, n).copy()
