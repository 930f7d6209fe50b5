"""Single-mode Gaussian states in the (mean, covariance) representation.

Quadratures follow ``a_phi = (a e^{-i phi} + a^dag e^{i phi}) / 2``, so the
vacuum has variance 1/4 in every direction and a pure state has
``det(cov) = 1/16``.  A point ``(x, y)`` of phase space corresponds to the
complex amplitude ``alpha = x + i y``.

A squeezed vacuum with ``zeta = r e^{i psi}`` has its anti-squeezed axis
(variance ``e^{2r}/4``) at angle ``psi/2`` from the x axis.  With this choice
the radial-marginal phase distribution peaks at ``phi = psi/2``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, InvalidArgumentError

TWO_PI = 2.0 * np.pi
VACUUM_VARIANCE = 0.25
PURE_DETERMINANT = VACUUM_VARIANCE**2


def reduce_angle(phi):
    """Map an angle (or array of angles) onto the canonical range [-pi, pi)."""
    out = np.mod(np.asarray(phi, dtype=float) + np.pi, TWO_PI) - np.pi
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    out = np.where(out >= np.pi, out - TWO_PI, out)
    return float(out) if out.ndim == 0 else out


def rotation(phi):
    """2x2 rotation matrix by ``phi`` (counter-clockwise)."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class SqueezingParams:
    """Squeezing magnitude ``r`` and phase ``psi`` of ``zeta = r e^{i psi}``."""

    r: float
    psi: float = 0.0

    def __post_init__(self):
        r = float(self.r)
        if not np.isfinite(r) or r < 0:
            raise DomainError(f"squeezing magnitude must be finite and >= 0, got {self.r!r}")
        psi = float(np.mod(float(self.psi), TWO_PI))
        if psi >= TWO_PI:
            psi = 0.0
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "psi", psi)

    @property
    def zeta(self) -> complex:
        return self.r * np.exp(1j * self.psi)

    @property
    def nbar(self) -> float:
        return float(np.sinh(self.r) ** 2)


class PhasePoint(NamedTuple):
    """A point ``alpha = x + i y`` of the amplitude plane."""

    x: float
    y: float

    @classmethod
    def from_complex(cls, alpha):
        alpha = complex(alpha)
        return cls(alpha.real, alpha.imag)

    def to_complex(self) -> complex:
        return complex(self.x, self.y)


class GaussianState:
    """Immutable single-mode Gaussian state.

    Parameters
    ----------
    mean : array_like, shape (2,)
        Quadrature means ``(<x>, <y>)``.
    cov : array_like, shape (2, 2)
        Symmetric positive-definite covariance with ``det(cov) >= 1/16``.
    """

    __slots__ = ("_mean", "_cov")

    # relative slack for the uncertainty bound, absorbs rounding in rotations
    _DET_RTOL = 1e-10

    def __init__(self, mean, cov):
        mean = np.array(mean, dtype=float).reshape(2)
        cov = np.array(cov, dtype=float).reshape(2, 2)
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidArgumentError("state moments must be finite")
        if cov[0, 1] != cov[1, 0]:
            raise InvalidArgumentError(f"covariance not symmetric: {cov[0, 1]!r} != {cov[1, 0]!r}")
        det = cov[0, 0] * cov[1, 1] - cov[0, 1] ** 2
        if cov[0, 0] <= 0 or det <= 0:
            raise InvalidArgumentError("covariance must be positive definite")
        if det < PURE_DETERMINANT * (1 - self._DET_RTOL):
            raise InvalidArgumentError(f"covariance violates the uncertainty bound: det={det!r} < 1/16")
        mean.setflags(write=False)
        cov.setflags(write=False)
        self._mean = mean
        self._cov = cov

    @property
    def mean(self) -> np.ndarray:
        return self._mean

    @property
    def cov(self) -> np.ndarray:
        return self._cov

    @property
    def alpha(self) -> complex:
        return complex(self._mean[0], self._mean[1])

    @property
    def det(self) -> float:
        c = self._cov
        return float(c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0])

    def squeezing_params(self) -> SqueezingParams:
        """Recover ``(r, psi)`` from the covariance principal axes."""
        return squeezing_params(self)

    def allclose(self, other: "GaussianState", atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self._mean, other.mean, rtol=0, atol=atol)
            and np.allclose(self._cov, other.cov, rtol=0, atol=atol)
        )

    def __eq__(self, other):
        if not isinstance(other, GaussianState):
            return NotImplemented
        return bool(np.array_equal(self._mean, other.mean) and np.array_equal(self._cov, other.cov))

    def __hash__(self):
        return hash((self._mean.tobytes(), self._cov.tobytes()))

    def __repr__(self):
        return f"GaussianState(mean={self._mean.tolist()}, cov={self._cov.tolist()})"

    def to_dict(self) -> dict:
        return {"mean": self._mean.tolist(), "cov": self._cov.tolist()}


def _symmetrize(cov):
    return 0.5 * (cov + cov.T)


def vacuum() -> GaussianState:
    return GaussianState(np.zeros(2), VACUUM_VARIANCE * np.eye(2))


def squeezed_vacuum(p: SqueezingParams) -> GaussianState:
    """Squeezed vacuum ``S(zeta)|0>``; anti-squeezed axis at angle ``psi/2``."""
    diag = np.diag([np.exp(2 * p.r) * VACUUM_VARIANCE, np.exp(-2 * p.r) * VACUUM_VARIANCE])
    if p.psi == 0.0:
        return GaussianState(np.zeros(2), diag)
    rot = rotation(p.psi / 2)
    return GaussianState(np.zeros(2), _symmetrize(rot @ diag @ rot.T))


def displaced_squeezed(alpha: PhasePoint, p: SqueezingParams) -> GaussianState:
    """Squeezed state ``D(alpha) S(zeta)|0>``."""
    alpha = PhasePoint(*alpha)
    return GaussianState([alpha.x, alpha.y], squeezed_vacuum(p).cov)


def phase_shift(s: GaussianState, phi: float) -> GaussianState:
    """Apply ``exp(i n phi)``: a rigid rotation of phase space by ``phi``.

    The mean picks up ``alpha -> alpha e^{i phi}`` and the squeezing phase
    advances by ``2 phi``.
    """
    rot = rotation(phi)
    return GaussianState(rot @ s.mean, _symmetrize(rot @ s.cov @ rot.T))


def mean_photon_number(s: GaussianState) -> float:
    """``<a^dag a> = var(x) + var(y) - 1/2 + |<alpha>|^2``."""
    c, m = s.cov, s.mean
    return float((c[0, 0] + c[1, 1] - 0.5) + (m[0] ** 2 + m[1] ** 2))


def r_from_nbar(nbar: float) -> float:
    """Squeezing magnitude of a squeezed vacuum holding ``nbar`` photons."""
    nbar = float(nbar)
    if not nbar >= 0:
        raise DomainError(f"mean photon number must be >= 0, got {nbar!r}")
    return float(np.arcsinh(np.sqrt(nbar)))


def squeezing_params(s: GaussianState) -> SqueezingParams:
    c = s.cov
    half_diff = 0.5 * (c[0, 0] - c[1, 1])
    spread = np.hypot(half_diff, c[0, 1])
    mid = 0.5 * (c[0, 0] + c[1, 1])
    lam_max, lam_min = mid + spread, mid - spread
    r = 0.25 * np.log(lam_max / lam_min)
    if spread == 0.0:
        return SqueezingParams(r, 0.0)
    # the major axis sits at theta = psi / 2
    theta = 0.5 * np.arctan2(c[0, 1], half_diff)
    return SqueezingParams(r, 2.0 * theta)


def wigner(s: GaussianState, pt):
    """Gaussian Wigner function of ``s`` at ``pt``.

    ``pt`` may be a single point ``(x, y)`` or an array whose last axis has
    length 2; the result then has the leading shape of ``pt``.
    """
    pt = np.asarray(pt, dtype=float)
    d = pt - s.mean
    c = s.cov
    det = c[0, 0] * c[1, 1] - c[0, 1] ** 2
    # inverse of a symmetric 2x2 matrix written out explicitly
    quad = (c[1, 1] * d[..., 0] ** 2 - 2 * c[0, 1] * d[..., 0] * d[..., 1] + c[0, 0] * d[..., 1] ** 2) / det
    val = np.exp(-0.5 * quad) / (2 * np.pi * np.sqrt(det))
    return float(val) if val.ndim == 0 else val
