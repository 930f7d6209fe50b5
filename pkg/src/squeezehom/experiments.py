"""Seeded experiment runs and their reports.

Every run is a pure function of its :class:`ExperimentConfig`; sub-seeds are
derived from ``config.seed`` and the position of the unit of work, so reports
come out identical whatever the degree of parallelism.
"""

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .errors import (
    AmbiguousPeakError,
    BinningTooCoarseError,
    DomainError,
    FlatDistributionError,
    InvalidArgumentError,
)
from .gaussian import (
    GaussianState,
    PhasePoint,
    SqueezingParams,
    displaced_squeezed,
    mean_photon_number,
    phase_shift,
    r_from_nbar,
    reduce_angle,
    squeezed_vacuum,
    squeezing_params,
)
from .homodyne import SampleBatch, derive_seed, sample_batch, write_samples_csv
from .phase_stats import (
    DEFAULT_BIN_COUNT,
    AnalyticPhasePdf,
    PhaseHistogram,
    approx_phase_pdf,
    build_histogram,
    chi_square_test,
    circular_std,
    hwhm_analytic,
    hwhm_from_histogram,
    numeric_phase_pdf,
    peak_locations,
    phase_grid,
)

DEFAULT_SAMPLES = 100_000
DEFAULT_SHIFT = np.pi / 8
MIN_SAMPLES = 1000
# below this many bins per half width the empirical estimate is refused
MIN_BINS_PER_HWHM = 0.5
# the CLI warns when the full width spans fewer bins than this
WARN_BINS_PER_FWHM = 5
PEAK_SEPARATION = np.pi / 4
# smallest change of circular spread that quadrature noise cannot produce
BROADENING_RESOLUTION = 1e-9
COMPARISON_GRID = 10_000


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of an experiment run.

    Squeezing is stored as ``r`` so that requesting ``nbar`` or the matching
    ``r`` yields the same state bit for bit; :attr:`nbar_values` reports
    ``sinh(r)**2``.
    """

    r_values: tuple
    samples_per_run: int = DEFAULT_SAMPLES
    bin_count: int = DEFAULT_BIN_COUNT
    phi0: float = 0.0
    shift: float = DEFAULT_SHIFT
    seed: int = 1
    repetitions: int = 5
    alpha: complex = 0j
    workers: int = 1

    def __post_init__(self):
        r_values = tuple(float(r) for r in np.atleast_1d(self.r_values))
        if not r_values:
            raise InvalidArgumentError("at least one squeezing value is required")
        for r in r_values:
            if not (math.isfinite(r) and r >= 0):
                raise DomainError(f"squeezing magnitude must be finite and >= 0, got {r!r}")
        if int(self.samples_per_run) != self.samples_per_run or self.samples_per_run < MIN_SAMPLES:
            raise InvalidArgumentError(f"samples_per_run must be an integer >= {MIN_SAMPLES}")
        if int(self.bin_count) != self.bin_count or self.bin_count < 2:
            raise InvalidArgumentError("bin_count must be an integer >= 2")
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise InvalidArgumentError("repetitions must be a positive integer")
        object.__setattr__(self, "r_values", r_values)
        object.__setattr__(self, "samples_per_run", int(self.samples_per_run))
        object.__setattr__(self, "bin_count", int(self.bin_count))
        object.__setattr__(self, "repetitions", int(self.repetitions))
        object.__setattr__(self, "phi0", float(self.phi0))
        object.__setattr__(self, "shift", float(self.shift))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "alpha", complex(self.alpha))

    @classmethod
    def from_nbar(cls, nbar_values, **kwargs) -> "ExperimentConfig":
        return cls(tuple(r_from_nbar(n) for n in np.atleast_1d(nbar_values)), **kwargs)

    @property
    def nbar_values(self) -> tuple:
        return tuple(float(np.sinh(r) ** 2) for r in self.r_values)

    @property
    def bin_width(self) -> float:
        return 2 * np.pi / self.bin_count

    def state(self, r: Optional[float] = None) -> GaussianState:
        """Displaced squeezed state with peak direction ``phi0`` (``psi = 2 phi0``)."""
        r = self.r_values[0] if r is None else r
        return displaced_squeezed(PhasePoint.from_complex(self.alpha), SqueezingParams(r, 2 * self.phi0))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["r_values"] = list(self.r_values)
        d["nbar_values"] = list(self.nbar_values)
        d["alpha"] = [self.alpha.real, self.alpha.imag]
        del d["workers"]
        return d


def shot_noise_baseline(nbar: float) -> float:
    """Classical-light phase uncertainty ``nbar**-0.5``."""
    if not nbar > 0:
        raise DomainError(f"nbar must be > 0, got {nbar!r}")
    return float(nbar) ** -0.5


def binning_check(r: float, bin_count: int) -> None:
    """Refuse bin widths that cannot resolve the peak; warn when marginal."""
    if r <= 0:
        return
    width = 2 * np.pi / bin_count
    hwhm = hwhm_analytic(r)
    if hwhm < MIN_BINS_PER_HWHM * width:
        raise BinningTooCoarseError(
            f"{bin_count} bins (width {width:.3g} rad) cannot resolve a half width of {hwhm:.3g} rad; raise the bin count"
        )
    if 2 * hwhm < WARN_BINS_PER_FWHM * width:
        warnings.warn(
            f"peak full width {2 * hwhm:.3g} rad spans fewer than {WARN_BINS_PER_FWHM} bins; "
            "empirical widths will be biased upward",
            stacklevel=3,
        )


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, np.generic):
        return _json_value(v.item())
    return v


def dumps(obj) -> str:
    """Deterministic JSON with round-trip float precision."""
    return json.dumps(_json_value(obj), indent=2, allow_nan=False) + "\n"


def _metadata(cfg: ExperimentConfig, **extra) -> dict:
    meta = {"package_version": __version__, "config": cfg.to_dict()}
    meta.update(extra)
    return meta


def _csv(header, columns) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def _state_phase_pdf(s: GaussianState, phi) -> np.ndarray:
    if np.all(s.mean == 0):
        return AnalyticPhasePdf.from_state(s)(phi)
    return numeric_phase_pdf(s, phi)


def _nearest(peaks, target) -> float:
    if not peaks:
        raise FlatDistributionError("no significant peak detected")
    return min(peaks, key=lambda p: abs(reduce_angle(p - target)))


@dataclass(frozen=True, eq=False)
class MonteCarloDataset:
    config: ExperimentConfig
    state: GaussianState
    batch: SampleBatch
    histogram: PhaseHistogram
    curve_phi: np.ndarray
    curve_exact: np.ndarray
    curve_approx: np.ndarray
    peaks: list
    hwhm_analytic: Optional[float]
    hwhm_empirical: Optional[float]
    width_error: Optional[str]
    chi_square: Optional[tuple]

    def summary(self) -> dict:
        chi = None
        if self.chi_square is not None:
            stat, dof, p = self.chi_square
            chi = {"statistic": stat, "dof": dof, "p_value": p}
        return {
            "experiment": "monte_carlo",
            "nbar": mean_photon_number(self.state),
            "state": self.state.to_dict(),
            "peaks": list(self.peaks),
            "hwhm_analytic": self.hwhm_analytic,
            "hwhm_empirical": self.hwhm_empirical,
            "width_error": self.width_error,
            "chi_square": chi,
            "metadata": _metadata(
                self.config,
                sampler=self.batch.method,
                artifact_defaults="sample and bin counts are user choices; "
                f"defaults are {DEFAULT_SAMPLES} samples and {DEFAULT_BIN_COUNT} bins",
            ),
        }

    def artifacts(self) -> dict:
        return {
            "samples.csv": lambda path: write_samples_csv(self.batch, path),
            "histogram.csv": self.histogram.to_csv(),
            "analytic.csv": _csv(
                ("phi", "pdf_exact", "pdf_approx"), (self.curve_phi, self.curve_exact, self.curve_approx)
            ),
            "simulate.json": dumps(self.summary()),
        }


def run_monte_carlo_reproduction(cfg: ExperimentConfig) -> MonteCarloDataset:
    """Sample one state, histogram the polar angles and overlay the exact density."""
    if len(cfg.r_values) != 1:
        raise InvalidArgumentError("the Monte Carlo reproduction takes a single squeezing value")
    r = cfg.r_values[0]
    state = cfg.state(r)
    binning_check(r, cfg.bin_count)
    batch = sample_batch(state, cfg.samples_per_run, cfg.seed, workers=cfg.workers)
    hist = build_histogram(batch.angles(), cfg.bin_count)

    phi = hist.centers
    exact = _state_phase_pdf(state, phi)
    squeezed_nbar = float(np.sinh(r) ** 2)
    if cfg.alpha == 0 and squeezed_nbar > 0:
        approx = approx_phase_pdf(squeezed_nbar, cfg.phi0, phi)
    else:
        approx = np.full_like(phi, np.nan)

    chi = None
    if cfg.alpha == 0:
        chi = chi_square_test(hist, AnalyticPhasePdf.from_state(state).bin_masses(hist.edges))

    h_analytic = h_empirical = width_error = None
    try:
        if cfg.alpha == 0:
            h_analytic = hwhm_analytic(r)
        h_empirical = hwhm_from_histogram(hist)
    except (FlatDistributionError, AmbiguousPeakError) as exc:
        width_error = f"{type(exc).__name__}: {exc}"

    return MonteCarloDataset(
        config=cfg,
        state=state,
        batch=batch,
        histogram=hist,
        curve_phi=phi,
        curve_exact=exact,
        curve_approx=approx,
        peaks=peak_locations(hist, PEAK_SEPARATION),
        hwhm_analytic=h_analytic,
        hwhm_empirical=h_empirical,
        width_error=width_error,
        chi_square=chi,
    )


@dataclass(frozen=True, eq=False)
class TranslationReport:
    shift_applied: float
    peak_before: float
    peak_after: float
    shape_distance: float
    analytic_shape_distance: float
    bin_width: Optional[float]
    config: ExperimentConfig
    histogram_before: Optional[PhaseHistogram] = None
    histogram_after: Optional[PhaseHistogram] = None
    peaks_before: list = field(default_factory=list)
    peaks_after: list = field(default_factory=list)
    batches: tuple = ()

    @property
    def peak_displacement(self) -> float:
        return reduce_angle(self.peak_after - self.peak_before)

    def summary(self) -> dict:
        return {
            "experiment": "fringe_translation",
            "mode": "analytic" if self.histogram_before is None else "monte_carlo",
            "shift_applied": self.shift_applied,
            "peak_before": self.peak_before,
            "peak_after": self.peak_after,
            "peak_displacement": self.peak_displacement,
            "bin_width": self.bin_width,
            "shape_distance": self.shape_distance,
            "analytic_shape_distance": self.analytic_shape_distance,
            "peaks_before": list(self.peaks_before),
            "peaks_after": list(self.peaks_after),
            "metadata": _metadata(self.config),
        }

    def artifacts(self, dump_samples: bool = False) -> dict:
        out = {"translate.json": dumps(self.summary())}
        if self.histogram_before is not None:
            out["histogram_before.csv"] = self.histogram_before.to_csv()
            out["histogram_after.csv"] = self.histogram_after.to_csv()
        if dump_samples and self.batches:
            before, after = self.batches
            out["samples_before.csv"] = lambda path: write_samples_csv(before, path)
            out["samples_after.csv"] = lambda path: write_samples_csv(after, path)
        return out


def _analytic_translation_distance(state, shifted, shift, grid=4096):
    phi = phase_grid(grid)
    return float(np.max(np.abs(_state_phase_pdf(shifted, phi) - _state_phase_pdf(state, phi - shift))))


def run_fringe_translation(cfg: ExperimentConfig, analytic: bool = False) -> TranslationReport:
    """Compare the phase distribution before and after a phase shift of ``cfg.shift``.

    ``analytic=True`` skips sampling and compares exact densities only.
    """
    r = cfg.r_values[0]
    state = cfg.state(r)
    shifted = phase_shift(state, cfg.shift)
    analytic_distance = _analytic_translation_distance(state, shifted, cfg.shift)

    if analytic:
        return TranslationReport(
            shift_applied=cfg.shift,
            peak_before=reduce_angle(squeezing_params(state).psi / 2),
            peak_after=reduce_angle(squeezing_params(shifted).psi / 2),
            shape_distance=analytic_distance,
            analytic_shape_distance=analytic_distance,
            bin_width=None,
            config=cfg,
        )

    binning_check(r, cfg.bin_count)
    batches = tuple(
        sample_batch(s, cfg.samples_per_run, derive_seed(cfg.seed, k), workers=cfg.workers)
        for k, s in enumerate((state, shifted))
    )
    before, after = (build_histogram(b.angles(), cfg.bin_count) for b in batches)
    peaks_before = peak_locations(before, PEAK_SEPARATION)
    peaks_after = peak_locations(after, PEAK_SEPARATION)
    peak_before = _nearest(peaks_before, cfg.phi0)
    peak_after = _nearest(peaks_after, cfg.phi0 + cfg.shift)

    # rigidly translate the original empirical curve and compare
    centers = before.centers
    recentred = np.interp(centers - cfg.shift, centers, before.density, period=2 * np.pi)
    shape_distance = float(np.max(np.abs(after.density - recentred)))

    return TranslationReport(
        shift_applied=cfg.shift,
        peak_before=peak_before,
        peak_after=peak_after,
        shape_distance=shape_distance,
        analytic_shape_distance=analytic_distance,
        bin_width=before.width,
        config=cfg,
        histogram_before=before,
        histogram_after=after,
        peaks_before=peaks_before,
        peaks_after=peaks_after,
        batches=batches,
    )


@dataclass(frozen=True)
class ScalingRow:
    nbar: float
    r: float
    hwhm_analytic: float
    shot_noise: float
    hwhm_empirical_median: float
    hwhm_empirical_iqr: float


@dataclass(frozen=True, eq=False)
class ScalingReport:
    rows: tuple
    fit_exponent: Optional[float]
    fit_prefactor: Optional[float]
    empirical_fit_exponent: Optional[float]
    empirical_fit_prefactor: Optional[float]
    config: ExperimentConfig

    def summary(self) -> dict:
        return {
            "experiment": "scaling",
            "fit": {"exponent": self.fit_exponent, "prefactor": self.fit_prefactor, "column": "hwhm_analytic"},
            "empirical_fit": {"exponent": self.empirical_fit_exponent, "prefactor": self.empirical_fit_prefactor},
            "rows": [asdict(row) for row in self.rows],
            "metadata": _metadata(self.config, width_definition="half width at half maximum"),
        }

    def to_csv(self) -> str:
        header = tuple(ScalingRow.__dataclass_fields__)
        return _csv(header, [[getattr(row, name) for row in self.rows] for name in header])

    def artifacts(self) -> dict:
        return {"scaling.csv": self.to_csv(), "scaling.json": dumps(self.summary())}


def _loglog_fit(nbar, width):
    slope, intercept = np.polyfit(np.log(nbar), np.log(width), 1)
    return float(slope), float(math.exp(intercept))


def _empirical_width(state, n, seed, bin_count):
    hist = build_histogram(sample_batch(state, n, seed).angles(), bin_count)
    try:
        return hwhm_from_histogram(hist)
    except (FlatDistributionError, AmbiguousPeakError):
        return math.nan


def run_scaling_study(cfg: ExperimentConfig, empirical: bool = True) -> ScalingReport:
    """Analytic and sampled peak widths over a grid of photon numbers, with a log-log fit.

    The headline fit uses the analytic column; the empirical column is fitted
    only when every row produced a valid width.
    """
    r_sorted = sorted(cfg.r_values)
    if len(r_sorted) < 3:
        raise InvalidArgumentError("the scaling study needs at least three photon numbers")
    if r_sorted[0] <= 0:
        raise FlatDistributionError("the scaling study needs nbar > 0 everywhere")
    if empirical:
        for r in r_sorted:
            binning_check(r, cfg.bin_count)

    widths = {}
    if empirical:
        jobs = [
            (cfg.state(r), cfg.samples_per_run, derive_seed(cfg.seed, i, rep), cfg.bin_count)
            for i, r in enumerate(r_sorted)
            for rep in range(cfg.repetitions)
        ]
        with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
            results = list(pool.map(lambda job: _empirical_width(*job), jobs))
        for i in range(len(r_sorted)):
            widths[i] = np.array(results[i * cfg.repetitions : (i + 1) * cfg.repetitions])

    rows = []
    for i, r in enumerate(r_sorted):
        nbar = float(np.sinh(r) ** 2)
        med = iqr = math.nan
        if empirical and not np.any(np.isnan(widths[i])):
            med = float(np.median(widths[i]))
            q75, q25 = np.percentile(widths[i], [75, 25])
            iqr = float(q75 - q25)
        rows.append(ScalingRow(nbar, r, hwhm_analytic(r), shot_noise_baseline(nbar), med, iqr))

    nbar = [row.nbar for row in rows]
    exponent, prefactor = _loglog_fit(nbar, [row.hwhm_analytic for row in rows])
    emp_exponent = emp_prefactor = None
    emp = [row.hwhm_empirical_median for row in rows]
    if empirical and not any(math.isnan(v) for v in emp):
        emp_exponent, emp_prefactor = _loglog_fit(nbar, emp)
    return ScalingReport(tuple(rows), exponent, prefactor, emp_exponent, emp_prefactor, cfg)


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    phi: np.ndarray
    displaced_before: np.ndarray
    displaced_after: np.ndarray
    vacuum_before: np.ndarray
    vacuum_after: np.ndarray
    displaced_std_before: float
    displaced_std_after: float
    vacuum_std_before: float
    vacuum_std_after: float
    vacuum_shape_distance: float
    displaced_peak_before: float
    displaced_state: GaussianState
    vacuum_state: GaussianState
    config: ExperimentConfig

    @property
    def broadened(self) -> bool:
        return self.displaced_std_after - self.displaced_std_before > BROADENING_RESOLUTION

    def summary(self) -> dict:
        return {
            "experiment": "squeezed_state_comparison",
            "displaced_state": self.displaced_state.to_dict(),
            "displaced_nbar": mean_photon_number(self.displaced_state),
            "vacuum_state": self.vacuum_state.to_dict(),
            "vacuum_nbar": mean_photon_number(self.vacuum_state),
            "shift": self.config.shift,
            "displaced_peak_before": self.displaced_peak_before,
            "displaced_circular_std": {"before": self.displaced_std_before, "after": self.displaced_std_after},
            "displaced_broadened": self.broadened,
            "vacuum_axial_circular_std": {"before": self.vacuum_std_before, "after": self.vacuum_std_after},
            "vacuum_shape_distance": self.vacuum_shape_distance,
            "metadata": _metadata(
                self.config,
                preparation="squeezing phase psi = 2 arg(alpha): anti-squeezed axis along the mean amplitude",
                broadening_resolution=BROADENING_RESOLUTION,
            ),
        }

    def artifacts(self) -> dict:
        columns = (self.phi, self.displaced_before, self.displaced_after, self.vacuum_before, self.vacuum_after)
        header = ("phi", "displaced_before", "displaced_after", "vacuum_before", "vacuum_after")
        return {"compare.csv": _csv(header, columns), "compare.json": dumps(self.summary())}


def run_squeezed_state_comparison(cfg: ExperimentConfig, grid: int = COMPARISON_GRID) -> ComparisonReport:
    """Phase spread of a displaced squeezed state and a squeezed vacuum under ``cfg.shift``.

    The displaced state uses ``cfg.alpha`` (``1`` when zero) and squeezing
    ``cfg.r_values[0]``, with ``psi = 2 arg(alpha)``.  The reference squeezed
    vacuum carries the same total photon number.
    """
    alpha = cfg.alpha if cfg.alpha != 0 else 1 + 0j
    r = cfg.r_values[0]
    displaced = displaced_squeezed(PhasePoint.from_complex(alpha), SqueezingParams(r, 2 * np.angle(alpha)))
    vac = squeezed_vacuum(SqueezingParams(r_from_nbar(mean_photon_number(displaced)), 2 * cfg.phi0))

    phi = phase_grid(grid)
    d_before = numeric_phase_pdf(displaced, phi)
    d_after = numeric_phase_pdf(phase_shift(displaced, cfg.shift), phi)
    shifted_vac = phase_shift(vac, cfg.shift)
    v_before = AnalyticPhasePdf.from_state(vac)(phi)
    v_after = AnalyticPhasePdf.from_state(shifted_vac)(phi)
    v_after_recentred = AnalyticPhasePdf.from_state(shifted_vac)(phi + cfg.shift)

    return ComparisonReport(
        phi=phi,
        displaced_before=d_before,
        displaced_after=d_after,
        vacuum_before=v_before,
        vacuum_after=v_after,
        displaced_std_before=circular_std(phi, d_before),
        displaced_std_after=circular_std(phi, d_after),
        vacuum_std_before=circular_std(phi, v_before, harmonic=2),
        vacuum_std_after=circular_std(phi, v_after, harmonic=2),
        vacuum_shape_distance=float(np.max(np.abs(v_after_recentred - v_before))),
        displaced_peak_before=float(phi[np.argmax(d_before)]),
        displaced_state=displaced,
        vacuum_state=vac,
        config=cfg,
    )


def analytic_curve(cfg: ExperimentConfig, points: int = 2000) -> dict:
    """Exact and approximate squeezed-vacuum densities on a uniform grid."""
    r = cfg.r_values[0]
    pdf = AnalyticPhasePdf(r, cfg.phi0)
    phi = phase_grid(points)
    nbar = float(np.sinh(r) ** 2)
    approx = approx_phase_pdf(nbar, cfg.phi0, phi) if nbar > 0 else np.full_like(phi, np.nan)
    summary = {
        "experiment": "analytic",
        "nbar": nbar,
        "r": r,
        "phi0": cfg.phi0,
        "peak_density": pdf(cfg.phi0),
        "min_density": pdf(cfg.phi0 + np.pi / 2),
        "hwhm_analytic": hwhm_analytic(r) if r > 0 else None,
        "approx_peak_density": nbar / (2 * np.pi) if nbar > 0 else None,
        "approx_half_maximum": nbar / (4 * np.pi) if nbar > 0 else None,
        "approx_normalisation": nbar / math.sqrt(1 + 16 * nbar**2) if nbar > 0 else None,
        "shot_noise": shot_noise_baseline(nbar) if nbar > 0 else None,
        "metadata": _metadata(cfg),
    }
    return {
        "analytic.csv": _csv(("phi", "pdf_exact", "pdf_approx"), (phi, pdf(phi), approx)),
        "analytic.json": dumps(summary),
    }
