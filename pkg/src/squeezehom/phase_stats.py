"""Phase distributions: closed forms, radial quadrature, histograms, widths and peaks.

Angles live on [-pi, pi).  The exact phase density of a squeezed vacuum with
squeezing ``r`` and peak ``phi0`` is::

    p(phi) = 1 / (2 pi (e^{-2r} cos^2(phi - phi0) + e^{2r} sin^2(phi - phi0)))

It is pi-periodic, normalised, and its half width at half maximum tends to
``1 / (4 nbar)`` for large ``nbar``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .errors import (
    AmbiguousPeakError,
    ConvergenceError,
    DomainError,
    FlatDistributionError,
    InvalidArgumentError,
)
from .gaussian import GaussianState, reduce_angle, squeezing_params

TWO_PI = 2.0 * np.pi
DEFAULT_BIN_COUNT = 628
# smoothed peaks must stand this many standard errors above their key col
PEAK_SIGNIFICANCE = 8.0


@dataclass(frozen=True)
class AnalyticPhasePdf:
    """Exact phase density of a squeezed vacuum (squeezing ``r``, peak ``phi0``)."""

    r: float
    phi0: float = 0.0

    def __post_init__(self):
        if not self.r >= 0:
            raise DomainError(f"squeezing magnitude must be >= 0, got {self.r!r}")

    @classmethod
    def from_state(cls, s: GaussianState) -> "AnalyticPhasePdf":
        if np.any(s.mean != 0):
            raise InvalidArgumentError("closed-form phase density only covers zero-mean states")
        p = squeezing_params(s)
        return cls(p.r, reduce_angle(p.psi / 2))

    def __call__(self, phi):
        return analytic_phase_pdf_squeezed_vacuum(self, phi)

    def cdf_unwrapped(self, phi):
        """Continuous antiderivative ``G`` with ``G(b) - G(a)`` the mass on ``[a, b]``."""
        u = np.asarray(phi, dtype=float) - self.phi0
        # theta is the image angle under the squeezing map, same quadrant as u
        theta = np.arctan2(np.exp(self.r) * np.sin(u), np.exp(-self.r) * np.cos(u))
        winding = np.round((u - theta) / TWO_PI)
        return (theta + TWO_PI * winding) / TWO_PI

    def bin_masses(self, edges) -> np.ndarray:
        return np.diff(self.cdf_unwrapped(edges))


def analytic_phase_pdf_squeezed_vacuum(p: AnalyticPhasePdf, phi):
    u = np.asarray(phi, dtype=float) - p.phi0
    denom = np.exp(-2 * p.r) * np.cos(u) ** 2 + np.exp(2 * p.r) * np.sin(u) ** 2
    val = 1.0 / (TWO_PI * denom)
    return float(val) if val.ndim == 0 else val


def approx_phase_pdf(nbar: float, phi0: float, phi):
    """Large-``nbar`` approximation in its commonly printed form.

    Over the full circle it integrates to ``nbar / sqrt(1 + 16 nbar^2)``,
    close to 1/4, so treat it as a comparison curve only.
    """
    if not nbar > 0:
        raise DomainError(f"nbar must be > 0, got {nbar!r}")
    s = np.sin(np.asarray(phi, dtype=float) - phi0)
    val = nbar / (TWO_PI * (1.0 + 16.0 * nbar**2 * s**2))
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    max_subdivisions: int = 200


def _radial_integral(prec, mean, norm, phi, r_max, quad):
    u = np.array([np.cos(phi), np.sin(phi)])
    a = float(u @ prec @ u)
    b = float(u @ prec @ mean)
    c = float(mean @ prec @ mean)
    exp = math.exp

    # along the ray the exponent is a quadratic in rho
    def integrand(rho):
        return rho * exp(-0.5 * (a * rho * rho - 2.0 * b * rho + c))

    centre, width = b / a, 1.0 / math.sqrt(a)
    breaks = [x for x in (centre - 8 * width, centre, centre + 8 * width) if 0.0 < x < r_max]
    val, err, info, *rest = integrate.quad(
        integrand,
        0.0,
        r_max,
        epsabs=0.0,
        epsrel=quad.rel_tol,
        # QUADPACK rejects a limit below the number of forced intervals
        limit=max(quad.max_subdivisions, len(breaks) + 1),
        points=breaks or None,
        full_output=1,
    )
    val, err = val * norm, err * norm
    if rest or err > quad.rel_tol * abs(val):
        raise ConvergenceError(f"radial quadrature failed at phi={phi!r}", val, err)
    return val


def numeric_phase_pdf(s: GaussianState, phi, quad: QuadratureSettings = QuadratureSettings()):
    """Radial marginal of the Wigner function, ``int_0^R rho W(rho cos phi, rho sin phi) d rho``.

    ``R = |mean| + 10 sqrt(largest covariance eigenvalue)`` leaves a Gaussian
    tail far below the requested relative tolerance.
    """
    cov = s.cov
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] ** 2
    prec = np.array([[cov[1, 1], -cov[0, 1]], [-cov[0, 1], cov[0, 0]]]) / det
    norm = 1.0 / (TWO_PI * np.sqrt(det))
    mean = np.asarray(s.mean, dtype=float)
    r_max = float(np.hypot(*mean) + 10.0 * np.sqrt(np.linalg.eigvalsh(cov)[-1]))
    phis = np.asarray(phi, dtype=float)
    vals = np.array([_radial_integral(prec, mean, norm, f, r_max, quad) for f in phis.ravel()])
    return float(vals[0]) if phis.ndim == 0 else vals.reshape(phis.shape)


def circular_std(phi, pdf, harmonic: int = 1) -> float:
    """Circular standard deviation of a density sampled on a uniform periodic grid.

    ``harmonic=2`` treats the distribution as axial (period pi), which is the
    meaningful spread for the two-peaked squeezed-vacuum density.
    """
    phi = np.asarray(phi, dtype=float)
    pdf = np.asarray(pdf, dtype=float)
    weights = pdf / pdf.sum()
    resultant = abs(np.sum(weights * np.exp(1j * harmonic * phi)))
    return float(np.sqrt(-2.0 * np.log(resultant)) / harmonic)


def phase_grid(n: int) -> np.ndarray:
    """``n`` equally spaced angles covering [-pi, pi) without the endpoint."""
    return -np.pi + TWO_PI * np.arange(n) / n


@dataclass(frozen=True, eq=False)
class PhaseHistogram:
    """Uniform angular histogram over [-pi, pi)."""

    bin_count: int
    edges: np.ndarray
    counts: np.ndarray
    total: int

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if self.bin_count < 1 or edges.shape != (self.bin_count + 1,) or counts.shape != (self.bin_count,):
            raise InvalidArgumentError("inconsistent histogram shapes")
        if edges[0] != -np.pi or edges[-1] != np.pi or np.any(np.diff(edges) <= 0):
            raise InvalidArgumentError("histogram edges must increase strictly from -pi to pi")
        if np.any(counts < 0) or int(counts.sum()) != self.total:
            raise InvalidArgumentError("histogram counts must be nonnegative and sum to total")
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def width(self) -> float:
        return TWO_PI / self.bin_count

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.total * np.diff(self.edges))

    def to_csv(self) -> str:
        lines = ["bin_left,bin_right,count,density"]
        for left, right, count, dens in zip(self.edges[:-1], self.edges[1:], self.counts, self.density):
            lines.append(f"{left:.17g},{right:.17g},{count},{dens:.17g}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"bin_count": self.bin_count, "total": self.total, "counts": self.counts.tolist()}


def histogram_edges(bin_count: int) -> np.ndarray:
    edges = np.linspace(-np.pi, np.pi, bin_count + 1)
    edges[0], edges[-1] = -np.pi, np.pi
    return edges


def build_histogram(angles, bin_count: int = DEFAULT_BIN_COUNT) -> PhaseHistogram:
    """Count angles into ``bin_count`` uniform bins, ``edge_i <= phi < edge_{i+1}``."""
    if int(bin_count) != bin_count or bin_count < 2:
        raise InvalidArgumentError(f"bin_count must be an integer >= 2, got {bin_count!r}")
    bin_count = int(bin_count)
    angles = np.asarray(angles, dtype=float).ravel()
    if angles.size == 0:
        raise InvalidArgumentError("cannot histogram an empty sequence of angles")
    bad = ~((angles >= -np.pi) & (angles < np.pi))
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise InvalidArgumentError(f"angle at index {idx} ({angles[idx]!r}) is outside [-pi, pi)")
    edges = histogram_edges(bin_count)
    idx = np.searchsorted(edges, angles, side="right") - 1
    counts = np.bincount(idx, minlength=bin_count)
    return PhaseHistogram(bin_count, edges, counts, int(angles.size))


def merge_histograms(*hists: PhaseHistogram) -> PhaseHistogram:
    """Add per-chunk histograms built on identical edges."""
    first = hists[0]
    for h in hists[1:]:
        if h.bin_count != first.bin_count:
            raise InvalidArgumentError("cannot merge histograms with different binning")
    counts = np.sum([h.counts for h in hists], axis=0)
    return PhaseHistogram(first.bin_count, first.edges, counts, sum(h.total for h in hists))


def chi_square_test(h: PhaseHistogram, masses) -> tuple:
    """Pearson chi-square of ``h`` against expected bin probabilities.

    Returns ``(statistic, dof, p_value)``.
    """
    masses = np.asarray(masses, dtype=float)
    expected = h.total * masses / masses.sum()
    stat = float(np.sum((h.counts - expected) ** 2 / expected))
    dof = h.bin_count - 1
    return stat, dof, float(stats.chi2.sf(stat, dof))


def hwhm_analytic(r: float) -> float:
    """Exact half width at half maximum of the squeezed-vacuum phase density.

    Solving ``p(phi0 + w) = p(phi0) / 2`` gives
    ``sin^2 w = e^{-2r} / (e^{2r} - e^{-2r})``.
    The density only dips below half maximum when ``e^{-4r} < 1/2``; weaker
    squeezing has no half width.
    """
    if not r > 0:
        raise FlatDistributionError(f"phase density is flat for r={r!r}; no peak to measure")
    sin_w = np.exp(-r) / np.sqrt(2.0 * np.sinh(2.0 * r))
    if sin_w >= 1.0:
        raise FlatDistributionError(f"phase density never falls to half maximum for r={r!r}")
    return float(np.arcsin(sin_w))


def hwhm_from_histogram(h: PhaseHistogram) -> float:
    """Empirical half width at half maximum of the dominant histogram peak.

    Walks outward from the maximum bin to the first bin below half the peak
    count on each side and interpolates linearly between bin centres.
    """
    counts = h.counts
    n, w = h.bin_count, h.width
    k = int(np.argmax(counts))
    peak = counts[k]
    half = peak / 2.0
    reach = int(np.floor((np.pi / 2) / w))
    offsets = np.arange(-reach, reach + 1)
    window = counts[(k + offsets) % n]
    if peak == 0 or window.min() >= half:
        raise FlatDistributionError("no bin falls below half maximum within pi/2 of the peak")

    # tied maxima inside one above-half run share the same crossings; ties
    # split by a sub-half bin are distinct peaks
    tied = offsets[window == peak]
    lo, hi = int(tied[0]), int(tied[-1])
    if np.any(window[lo + reach : hi + reach + 1] < half):
        raise AmbiguousPeakError(f"{len(tied)} separate bins share the maximum count {peak}")

    def crossing(start, step):
        j = start
        while counts[(k + j + step) % n] >= half:
            j += step
            if abs(j) >= reach:
                raise FlatDistributionError("peak flank does not fall below half maximum within pi/2")
        inside, outside = counts[(k + j) % n], counts[(k + j + step) % n]
        return (j + step * (inside - half) / (inside - outside)) * w

    return float((crossing(hi, 1) - crossing(lo, -1)) / 2.0)


def _smoothed(counts: np.ndarray) -> np.ndarray:
    c = counts.astype(float)
    return (np.roll(c, 1) + c + np.roll(c, -1)) / 3.0


def _prominence(s: np.ndarray, i: int) -> float:
    n = len(s)
    height = s[i]
    cols = []
    for step in (1, -1):
        lowest = height
        for j in range(1, n):
            v = s[(i + step * j) % n]
            if v > height:
                break
            lowest = min(lowest, v)
        else:
            return height - s.min()
        cols.append(lowest)
    return height - max(cols)


def peak_locations(h: PhaseHistogram, min_separation: float = np.pi / 4) -> list:
    """Significant local maxima of the 3-bin smoothed histogram, sorted ascending.

    A maximum counts only when its topographic prominence exceeds the
    Poisson noise of the smoothed counts by :data:`PEAK_SIGNIFICANCE`.  Peaks
    closer than ``min_separation`` (circularly) to a taller one are dropped.
    """
    if not min_separation > h.width:
        raise InvalidArgumentError("min_separation must exceed the bin width")
    s = _smoothed(h.counts)
    n = len(s)
    left, right = np.roll(s, 1), np.roll(s, -1)
    candidates = np.flatnonzero((s > left) & (s >= right))

    significant = []
    for i in candidates:
        # a plateau of equal values is located at its centre
        j = i
        while s[(j + 1) % n] == s[i] and (j + 1) % n != i:
            j += 1
        if s[(j + 1) % n] > s[i]:
            continue
        centre = h.centers[i] + 0.5 * (j - i) * h.width
        prom = _prominence(s, int(i))
        col = s[i] - prom
        if prom > PEAK_SIGNIFICANCE * np.sqrt((s[i] + col) / 3.0):
            significant.append((s[i], reduce_angle(centre)))

    accepted = []
    for height, phi in sorted(significant, key=lambda t: (-t[0], t[1])):
        if all(abs(reduce_angle(phi - other)) >= min_separation for other in accepted):
            accepted.append(phi)
    return sorted(accepted)
