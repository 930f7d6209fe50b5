"""Squeezed-vacuum double-homodyne phase detection simulator."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AmbiguousPeakError,
    BinningTooCoarseError,
    ConvergenceError,
    DegeneratePointError,
    DomainError,
    FlatDistributionError,
    InvalidArgumentError,
    OutputCollisionError,
    SqueezehomError,
)
from .gaussian import (  # noqa: E402
    GaussianState,
    PhasePoint,
    SqueezingParams,
    displaced_squeezed,
    mean_photon_number,
    phase_shift,
    r_from_nbar,
    squeezed_vacuum,
    squeezing_params,
    vacuum,
    wigner,
)
from .homodyne import SampleBatch, SamplePoint, polar_angle, sample_batch, sample_pair  # noqa: E402
from .phase_stats import (  # noqa: E402
    AnalyticPhasePdf,
    PhaseHistogram,
    QuadratureSettings,
    analytic_phase_pdf_squeezed_vacuum,
    approx_phase_pdf,
    build_histogram,
    hwhm_analytic,
    hwhm_from_histogram,
    numeric_phase_pdf,
    peak_locations,
)
