"""Acceptance suite: one test per criterion, summarised as PASS/FAIL lines at the end of the run."""

import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, stats

from squeezehom.cli import parse_and_dispatch
from squeezehom.experiments import (
    ExperimentConfig,
    run_fringe_translation,
    run_monte_carlo_reproduction,
    run_scaling_study,
    run_squeezed_state_comparison,
    shot_noise_baseline,
)
from squeezehom.gaussian import PhasePoint, SqueezingParams, displaced_squeezed, mean_photon_number, phase_shift, r_from_nbar, squeezed_vacuum, vacuum, wigner
from squeezehom.homodyne import sample_batch
from squeezehom.phase_stats import AnalyticPhasePdf, numeric_phase_pdf, phase_grid

PI8 = math.pi / 8


def bisection_hwhm(r):
    """Half width from root-finding on the closed-form density, independent of the library formula."""
    pdf = AnalyticPhasePdf(r)
    half = pdf(0.0) / 2
    return optimize.brentq(lambda u: pdf(u) - half, 0, math.pi / 2, xtol=1e-15)


def exact_bin_masses(r, edges):
    pdf = AnalyticPhasePdf(r)
    return np.array([integrate.quad(pdf, a, b, epsabs=0, epsrel=1e-12)[0] for a, b in zip(edges[:-1], edges[1:])])


def circular_std_quad(pdf, harmonic):
    c = integrate.quad(lambda u: pdf(u) * math.cos(harmonic * u), -math.pi, math.pi, limit=400, points=[0.0])[0]
    s = integrate.quad(lambda u: pdf(u) * math.sin(harmonic * u), -math.pi, math.pi, limit=400, points=[0.0])[0]
    return math.sqrt(-2 * math.log(math.hypot(c, s))) / harmonic


@pytest.mark.criterion("1 Heisenberg scaling: exponent in [-1.05,-0.95], 4n*HWHM in [0.98,1.00] at n=80, <1 s")
def test_heisenberg_scaling(record_property):
    start = time.perf_counter()
    rep = run_scaling_study(ExperimentConfig.from_nbar([5, 10, 20, 40, 80]), empirical=False)
    elapsed = time.perf_counter() - start
    nbar = np.array([row.nbar for row in rep.rows])
    widths = np.array([bisection_hwhm(r_from_nbar(n)) for n in nbar])
    oracle_slope = stats.linregress(np.log(nbar), np.log(widths)).slope
    product = 4 * 80 * rep.rows[-1].hwhm_analytic
    record_property("detail", f"exponent={rep.fit_exponent:.5f} oracle={oracle_slope:.5f} 4n*HWHM={product:.5f} t={elapsed:.3f}s")
    assert -1.05 <= rep.fit_exponent <= -0.95
    assert rep.fit_exponent == pytest.approx(oracle_slope, abs=1e-9)
    assert 0.98 <= product <= 1.00
    assert elapsed < 1.0


@pytest.mark.criterion("2 Exact pdf identity: radial quadrature vs closed form within 1e-8 relative")
def test_exact_pdf_identity(record_property):
    phi = phase_grid(100)
    worst = 0.0
    for r in (0.5, 1.3170, 2.0):
        numeric = numeric_phase_pdf(squeezed_vacuum(SqueezingParams(r, 0)), phi)
        exact = AnalyticPhasePdf(r)(phi)
        worst = max(worst, float(np.max(np.abs(numeric / exact - 1))))
    record_property("detail", f"max relative deviation={worst:.2e}")
    assert worst <= 1e-8


@pytest.mark.criterion("3 Monte Carlo at n=3: chi-square p>0.01, peaks at 0 and pi within 2 bins, HWHM within 10%, <10 s")
def test_monte_carlo_reproduction(record_property):
    start = time.perf_counter()
    ds = run_monte_carlo_reproduction(ExperimentConfig.from_nbar([3], samples_per_run=10**5, bin_count=628, seed=1))
    elapsed = time.perf_counter() - start
    h = ds.histogram
    masses = exact_bin_masses(r_from_nbar(3), h.edges)
    p_value = stats.chisquare(h.counts, h.total * masses / masses.sum()).pvalue
    analytic = bisection_hwhm(r_from_nbar(3))
    w = h.width
    near_zero = min(abs(p) for p in ds.peaks)
    near_pi = min(math.pi - abs(p) for p in ds.peaks)
    record_property(
        "detail",
        f"p={p_value:.3f} peaks={[round(p, 4) for p in ds.peaks]} hwhm={ds.hwhm_empirical:.5f} vs {analytic:.6f} t={elapsed:.2f}s",
    )
    assert analytic == pytest.approx(0.072045, abs=1e-6)
    assert p_value > 0.01
    assert ds.chi_square[2] == pytest.approx(p_value, rel=1e-6)
    assert near_zero < 2 * w and near_pi < 2 * w
    assert ds.hwhm_empirical == pytest.approx(analytic, rel=0.10)
    assert elapsed < 10


@pytest.mark.criterion("4 Fringe translation: pi/8 shift within 2 bins at n=10^6, analytic covariance 1e-12, <30 s")
def test_fringe_translation(record_property):
    start = time.perf_counter()
    rep = run_fringe_translation(ExperimentConfig.from_nbar([3], samples_per_run=10**6, shift=PI8))
    analytic = run_fringe_translation(ExperimentConfig.from_nbar([3], shift=PI8), analytic=True)
    elapsed = time.perf_counter() - start
    # independent check of translation covariance on a fresh grid
    r = r_from_nbar(3)
    phi = phase_grid(1000)
    before = AnalyticPhasePdf.from_state(squeezed_vacuum(SqueezingParams(r, 0)))
    after = AnalyticPhasePdf.from_state(phase_shift(squeezed_vacuum(SqueezingParams(r, 0)), PI8))
    covariance = float(np.max(np.abs(after(phi) - before(phi - PI8))))
    record_property(
        "detail",
        f"displacement={rep.peak_displacement:.5f} target={PI8:.5f} bin={rep.bin_width:.5f} "
        f"analytic={analytic.shape_distance:.1e}/{covariance:.1e} t={elapsed:.2f}s",
    )
    assert abs(rep.peak_displacement - PI8) <= 2 * rep.bin_width
    assert analytic.shape_distance <= 1e-12
    assert covariance <= 1e-12
    assert elapsed < 30


@pytest.fixture(scope="module")
def comparison():
    start = time.perf_counter()
    rep = run_squeezed_state_comparison(ExperimentConfig.from_nbar([3], shift=PI8))
    return rep, time.perf_counter() - start


@pytest.mark.criterion("5a Displaced squeezed state (|alpha|=1, n=4): circular std strictly increases after pi/8 shift")
def test_displaced_broadening(comparison, record_property):
    rep, elapsed = comparison
    state = rep.displaced_state
    before = circular_std_quad(lambda u: numeric_phase_pdf(state, u), 1)
    after = circular_std_quad(lambda u: numeric_phase_pdf(phase_shift(state, PI8), u), 1)
    record_property(
        "detail",
        f"std before={rep.displaced_std_before:.12f} after={rep.displaced_std_after:.12f} "
        f"(quad oracle {before:.12f} -> {after:.12f}) nbar={mean_photon_number(state):.6f} t={elapsed:.2f}s",
    )
    assert abs(state.alpha) == pytest.approx(1)
    assert mean_photon_number(state) == pytest.approx(4, rel=1e-12)
    assert rep.displaced_std_before == pytest.approx(before, rel=1e-6)
    assert rep.broadened
    assert after > before


@pytest.mark.criterion("5b Squeezed vacuum pdf shape invariant under pi/8 shift to 1e-10")
def test_vacuum_shape_invariance(comparison, record_property):
    rep, elapsed = comparison
    record_property("detail", f"shape distance={rep.vacuum_shape_distance:.1e} t={elapsed:.2f}s")
    assert rep.vacuum_shape_distance <= 1e-10
    assert elapsed < 10


@pytest.mark.criterion("6 Shot-noise beating: analytic HWHM < n^-1/2 for every n >= 1 on the grid")
def test_shot_noise_beating(record_property):
    grid = [1, 2, 3, 4, 5, 10, 20, 40, 80]
    rep = run_scaling_study(ExperimentConfig.from_nbar(grid, bin_count=2**14), empirical=False)
    ratios = [row.hwhm_analytic / row.shot_noise for row in rep.rows]
    record_property("detail", f"max HWHM/shot-noise ratio={max(ratios):.4f}")
    assert all(row.shot_noise == pytest.approx(1 / math.sqrt(row.nbar)) for row in rep.rows)
    assert all(row.hwhm_analytic < shot_noise_baseline(row.nbar) for row in rep.rows)


_states = st.builds(
    lambda r, psi, x, y: displaced_squeezed(PhasePoint(x, y), SqueezingParams(r, psi)),
    st.floats(0, 3),
    st.floats(-10, 10),
    st.floats(-3, 3),
    st.floats(-3, 3),
)


@pytest.mark.criterion("7a Purity det(cov)=1/16 preserved to 1e-12")
@settings(max_examples=300, deadline=None)
@given(_states, st.floats(-10, 10))
def test_purity(state, phi):
    assert abs(state.det - 1 / 16) <= 1e-12
    assert abs(phase_shift(state, phi).det - 1 / 16) <= 1e-12


@pytest.mark.criterion("7b Phase-shift group law and energy conservation to 1e-12")
@settings(max_examples=300, deadline=None)
@given(_states, st.floats(-10, 10), st.floats(-10, 10))
def test_group_law_and_energy(state, a, b):
    composed = phase_shift(phase_shift(state, a), b)
    direct = phase_shift(state, a + b)
    assert np.max(np.abs(composed.mean - direct.mean)) <= 1e-12
    assert np.max(np.abs(composed.cov - direct.cov)) <= 1e-12
    assert abs(mean_photon_number(phase_shift(state, a)) - mean_photon_number(state)) <= 1e-12


@pytest.mark.criterion("7c Wigner normalisation to 1e-6 and pdf normalisation to 1e-10")
def test_normalisation(record_property):
    worst_w = 0.0
    for state in (vacuum(), squeezed_vacuum(SqueezingParams(1.0, 1.0)), displaced_squeezed(PhasePoint(1, 0), SqueezingParams(r_from_nbar(3), 0))):
        sx, sy = np.sqrt(np.diag(state.cov))
        mx, my = state.mean
        total = integrate.dblquad(
            lambda y, x: wigner(state, (x, y)), mx - 10 * sx, mx + 10 * sx, my - 10 * sy, my + 10 * sy, epsabs=1e-11, epsrel=1e-11
        )[0]
        worst_w = max(worst_w, abs(total - 1))
    worst_p = 0.0
    for r in (0.0, 0.5, 1.3170, 2.0, 3.0):
        pdf = AnalyticPhasePdf(r, 0.3)
        total = integrate.quad(pdf, -math.pi, math.pi, points=[0.3, 0.3 - math.pi], limit=400, epsabs=0, epsrel=1e-13)[0]
        worst_p = max(worst_p, abs(total - 1), abs(pdf.cdf_unwrapped(math.pi) - pdf.cdf_unwrapped(-math.pi) - 1))
    record_property("detail", f"wigner={worst_w:.1e} pdf={worst_p:.1e}")
    assert worst_w <= 1e-6
    assert worst_p <= 1e-10


@pytest.mark.criterion("7d Sampler moment fidelity within 5 standard errors at 10^6 draws")
def test_moment_fidelity(record_property):
    worst = 0.0
    states = [vacuum(), squeezed_vacuum(SqueezingParams(r_from_nbar(3), 0)), displaced_squeezed(PhasePoint(1, 0.5), SqueezingParams(0.8, 2.0))]
    for k, state in enumerate(states):
        pts = sample_batch(state, 10**6, 100 + k).points
        n = len(pts)
        c = state.cov
        z_mean = (pts.mean(axis=0) - state.mean) / np.sqrt(np.diag(c) / n)
        emp = np.cov(pts, rowvar=False)
        se = np.array([c[0, 0] * math.sqrt(2 / n), c[1, 1] * math.sqrt(2 / n), math.sqrt((c[0, 0] * c[1, 1] + c[0, 1] ** 2) / n)])
        z_cov = (np.array([emp[0, 0], emp[1, 1], emp[0, 1]]) - np.array([c[0, 0], c[1, 1], c[0, 1]])) / se
        worst = max(worst, float(np.max(np.abs(np.concatenate([z_mean, z_cov])))))
    record_property("detail", f"max |z|={worst:.2f}")
    assert worst < 5


@pytest.mark.criterion("7e Determinism: byte-identical reruns under a fixed seed")
def test_determinism(tmp_path, record_property):
    runs = [
        ("simulate", "--samples", 20000),
        ("translate", "--samples", 20000, "--dump-samples"),
        ("scaling", "--nbar", "1,2,3", "--samples", 5000, "--reps", 3, "--workers", 3),
        ("compare-squeezed",),
    ]
    compared = 0
    for i, args in enumerate(runs):
        dirs = [tmp_path / f"{i}-{k}" for k in range(2)]
        for d in dirs:
            assert parse_and_dispatch([str(a) for a in (*args, "--seed", 17, "--out", d)]) == 0
        first, second = ({p.name: p.read_bytes() for p in d.iterdir()} for d in dirs)
        assert first == second
        compared += len(first)
    record_property("detail", f"{compared} files identical across reruns")
