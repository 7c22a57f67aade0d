"""Random-coupling ensembles and Monte Carlo averaging of the game utility.

An ensemble fixes the distribution of the coupling vector g = g_bar + delta_g
with E[delta_g] = 0.  Four kinds are supported, named by their covariance:

    gaussian_iid         C = sigma^2 I
    gaussian_perfect     C = sigma^2 (all ones), a single shared shift
    gaussian_correlated  C_jl = sigma^2 exp(-d(j,l)/xi)
    uniform_iid          independent uniform on [g_bar - W/2, g_bar + W/2],
                         reported with sigma = W / (2 sqrt 3)

Sampling is reproducible and order-independent: sample number `index` of a
run with seed `seed` is drawn from its own counter-based stream keyed by
(seed, index), so serial and parallel execution produce identical results.

Couplings must stay positive.  The default policy redraws the offending
sample from its own stream (and reports how often); the strict policy aborts
the run.  In the parameter regimes of interest a violation is many standard
deviations out, so the truncation bias is far below statistical resolution.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import NumericsError
from .free_fermion import build_nambu, diagonalize_nambu, log_overlap_squared, reference_transform_g0
from .parity_game import utility_clean, utility_from_log_overlap
from .perturbation import (
    CovarianceMatrix,
    exponential_covariance,
    iid_covariance,
    perfect_covariance,
    second_variation,
)

GAUSSIAN_KINDS = ("gaussian_iid", "gaussian_perfect", "gaussian_correlated")
KINDS = GAUSSIAN_KINDS + ("uniform_iid",)
POLICIES = ("reject_sample", "reject_run")

HISTOGRAM_BINS = 101
HISTOGRAM_SPAN_STDS = 5.0
MAX_REDRAWS = 1000
COVARIANCE_EIGENVALUE_FLOOR = -1e-10


@dataclass(frozen=True)
class DisorderEnsemble:
    """Distribution of the coupling vector; immutable and hashable."""

    mean: float
    n_sites: int
    kind: str
    sigma: float
    xi: float | None = None
    distance_mode: str = "linear"
    width: float | None = None
    positivity_policy: str = "reject_sample"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.positivity_policy not in POLICIES:
            raise ValueError(f"unknown positivity policy {self.positivity_policy!r}")
        if not (math.isfinite(self.mean) and self.mean > 0.0):
            raise ValueError("mean coupling must be positive and finite")
        if not (math.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ValueError("sigma must be nonnegative and finite")
        if self.n_sites < 4 or self.n_sites % 2:
            raise ValueError("n_sites must be an even integer >= 4")
        if self.kind == "gaussian_correlated":
            if self.xi is None or not (math.isfinite(self.xi) and self.xi > 0.0):
                raise ValueError("gaussian_correlated needs a positive correlation length")
            if self.distance_mode not in ("linear", "ring"):
                raise ValueError(f"unknown distance mode {self.distance_mode!r}")
        if self.kind == "uniform_iid":
            if self.width is None or not (math.isfinite(self.width) and self.width >= 0.0):
                raise ValueError("uniform_iid needs a nonnegative width")
            if abs(self.sigma - self.width / (2.0 * math.sqrt(3.0))) > 1e-12 * (1.0 + self.width):
                raise ValueError("sigma must equal width / (2 sqrt 3) for uniform_iid")
        elif self.width is not None:
            raise ValueError("width is only meaningful for uniform_iid")


def gaussian_iid(mean: float, sigma: float, n_sites: int, positivity_policy: str = "reject_sample") -> DisorderEnsemble:
    return DisorderEnsemble(mean, n_sites, "gaussian_iid", sigma, positivity_policy=positivity_policy)


def gaussian_perfect(mean: float, sigma: float, n_sites: int, positivity_policy: str = "reject_sample") -> DisorderEnsemble:
    return DisorderEnsemble(mean, n_sites, "gaussian_perfect", sigma, positivity_policy=positivity_policy)


def gaussian_correlated(
    mean: float,
    sigma: float,
    xi: float,
    n_sites: int,
    distance_mode: str = "linear",
    positivity_policy: str = "reject_sample",
) -> DisorderEnsemble:
    return DisorderEnsemble(
        mean, n_sites, "gaussian_correlated", sigma,
        xi=xi, distance_mode=distance_mode, positivity_policy=positivity_policy,
    )


def uniform_iid(mean: float, width: float, n_sites: int, positivity_policy: str = "reject_sample") -> DisorderEnsemble:
    sigma = width / (2.0 * math.sqrt(3.0))
    return DisorderEnsemble(
        mean, n_sites, "uniform_iid", sigma, width=width, positivity_policy=positivity_policy,
    )


def covariance_matrix(ensemble: DisorderEnsemble) -> CovarianceMatrix:
    """The coupling covariance implied by the ensemble (exact for all kinds)."""
    if ensemble.kind == "gaussian_perfect":
        return perfect_covariance(ensemble.sigma, ensemble.n_sites)
    if ensemble.kind == "gaussian_correlated":
        return exponential_covariance(
            ensemble.sigma, ensemble.xi, ensemble.n_sites, distance_mode=ensemble.distance_mode
        )
    return iid_covariance(ensemble.sigma, ensemble.n_sites)


def predicted_shift(ensemble: DisorderEnsemble) -> float:
    """Quadratic-response prediction for E[u] - u(g_bar)."""
    return second_variation(ensemble.mean, ensemble.n_sites, covariance_matrix(ensemble)).value


@lru_cache(maxsize=8)
def _correlated_factor(sigma: float, xi: float, n_sites: int, distance_mode: str) -> np.ndarray:
    """A matrix L with L L^T equal to the exponential covariance.

    Cholesky when the matrix is numerically positive definite; otherwise an
    eigenvalue factorization with small negative eigenvalues (roundoff from
    a positive-semidefinite limit) truncated to zero.  Eigenvalues below the
    floor mean the requested covariance is genuinely invalid.
    """
    cov = exponential_covariance(sigma, xi, n_sites, distance_mode=distance_mode).entries
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        evals, evecs = np.linalg.eigh(cov)
        if evals.min() < COVARIANCE_EIGENVALUE_FLOOR * max(1.0, sigma**2):
            raise NumericsError(
                f"covariance not positive semidefinite: min eigenvalue {evals.min():.3e}"
            ) from None
        factor = evecs * np.sqrt(np.clip(evals, 0.0, None))
    factor.setflags(write=False)
    return factor


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """The dedicated generator for sample `index` of a run seeded with `seed`."""
    if seed < 0 or index < 0:
        raise ValueError("seed and sample index must be nonnegative")
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(index)))


def _draw(ensemble: DisorderEnsemble, rng: np.random.Generator) -> np.ndarray:
    n = ensemble.n_sites
    if ensemble.sigma == 0.0:
        return np.full(n, ensemble.mean)
    if ensemble.kind == "gaussian_iid":
        return ensemble.mean + ensemble.sigma * rng.standard_normal(n)
    if ensemble.kind == "gaussian_perfect":
        return np.full(n, ensemble.mean + ensemble.sigma * rng.standard_normal())
    if ensemble.kind == "gaussian_correlated":
        factor = _correlated_factor(ensemble.sigma, ensemble.xi, n, ensemble.distance_mode)
        return ensemble.mean + factor @ rng.standard_normal(n)
    half = ensemble.width / 2.0
    return rng.uniform(ensemble.mean - half, ensemble.mean + half, n)


def sample_couplings(ensemble: DisorderEnsemble, seed: int, index: int) -> tuple[np.ndarray, int]:
    """One coupling realization and the number of positivity redraws it took.

    Redraws come from the same per-sample stream, so the result is a pure
    function of (ensemble, seed, index).
    """
    rng = sample_stream(seed, index)
    for attempt in range(MAX_REDRAWS):
        g = _draw(ensemble, rng)
        if np.all(g > 0.0):
            return g, attempt
        if ensemble.positivity_policy == "reject_run":
            raise ValueError(
                f"sample {index} drew a nonpositive coupling under reject_run policy"
            )
    raise NumericsError(
        f"exceeded {MAX_REDRAWS} positivity redraws; ensemble is misconfigured"
    )


def _sample_utility(ensemble: DisorderEnsemble, g: np.ndarray) -> float:
    # A perfect-correlation draw is a uniform chain, where the momentum-space
    # product form of the utility is exact and much cheaper than the general
    # determinant route.  The two routes agree to machine precision (tested).
    # Covers sigma = 0 for every kind, making E[u] = u(g_bar) bit-exact there.
    if ensemble.kind == "gaussian_perfect" or ensemble.sigma == 0.0:
        return utility_clean(float(g[0]), ensemble.n_sites)
    transform = diagonalize_nambu(build_nambu(g))
    log_o_plus = log_overlap_squared(reference_transform_g0(ensemble.n_sites), transform)
    return utility_from_log_overlap(log_o_plus, ensemble.n_sites)


@dataclass(frozen=True)
class MonteCarloResult:
    """Sample statistics of the utility under one ensemble and seed.

    `n_samples` counts the realizations that entered the moments; draws whose
    utility is -inf (zero overlap) are excluded and tallied in `n_rejected`
    together with positivity redraws.  The histogram bins the per-site shift
    (u(g) - u(g_bar)) / N over `n_samples` values, with outliers clipped into
    the edge bins.
    """

    n_samples: int
    mean_utility: float
    stderr: float
    mean_density: float
    clean_utility: float
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    n_rejected: int
    seed: int


def density_stderr(result: MonteCarloResult, n_sites: int) -> float:
    """Standard error of the density mean: the utility stderr scaled by 1/N."""
    return result.stderr / n_sites


def _shift_histogram(shifts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    center = float(np.mean(shifts))
    spread = float(np.std(shifts))
    span = HISTOGRAM_SPAN_STDS * spread
    if span == 0.0:
        span = max(abs(center) * 1e-12, 1e-15)
    edges = np.linspace(center - span, center + span, HISTOGRAM_BINS + 1)
    clipped = np.clip(shifts, edges[0], edges[-1])
    counts, _ = np.histogram(clipped, bins=edges)
    return edges, counts


def expected_utility(
    ensemble: DisorderEnsemble, n_samples: int, seed: int
) -> MonteCarloResult:
    """Monte Carlo estimate of the expected utility under the ensemble.

    Draws `n_samples` coupling realizations from per-sample streams and
    evaluates the exact utility of each.  The clean value u(g_bar) is
    reported alongside for shift and histogram construction.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    clean = utility_clean(ensemble.mean, ensemble.n_sites)
    utilities = np.empty(n_samples)
    n_rejected = 0
    for index in range(n_samples):
        g, redraws = sample_couplings(ensemble, seed, index)
        n_rejected += redraws
        utilities[index] = _sample_utility(ensemble, g)

    finite = np.isfinite(utilities)
    n_rejected += int(np.count_nonzero(~finite))
    kept = utilities[finite]
    if kept.size == 0:
        raise NumericsError("every sample produced a degenerate (-inf) utility")

    mean_u = float(np.mean(kept))
    stderr = float(np.std(kept, ddof=1) / math.sqrt(kept.size)) if kept.size > 1 else 0.0
    edges, counts = _shift_histogram((kept - clean) / ensemble.n_sites)
    return MonteCarloResult(
        n_samples=int(kept.size),
        mean_utility=mean_u,
        stderr=stderr,
        mean_density=mean_u / ensemble.n_sites,
        clean_utility=clean,
        histogram_edges=edges,
        histogram_counts=counts,
        n_rejected=n_rejected,
        seed=seed,
    )


@dataclass(frozen=True)
class ScanRow:
    sigma: float
    shift: float
    stderr: float
    prediction: float


def second_variation_scan(
    ensemble: DisorderEnsemble, sigmas, n_samples: int, seed: int
) -> tuple[ScanRow, ...]:
    """Sampled E[u] - u(g_bar) against the quadratic prediction on a sigma grid.

    Each sigma runs under seed + its grid position, keeping all streams
    disjoint.  For the uniform kind the grid values are interpreted as the
    standard deviation and converted back to a width.
    """
    rows = []
    for offset, sigma in enumerate(sigmas):
        if ensemble.kind == "uniform_iid":
            scaled = replace(ensemble, sigma=float(sigma), width=float(sigma) * 2.0 * math.sqrt(3.0))
        else:
            scaled = replace(ensemble, sigma=float(sigma))
        result = expected_utility(scaled, n_samples, seed + offset)
        rows.append(
            ScanRow(
                sigma=float(sigma),
                shift=result.mean_utility - result.clean_utility,
                stderr=result.stderr,
                prediction=predicted_shift(scaled),
            )
        )
    return tuple(rows)


def histogram_experiment(
    ensemble: DisorderEnsemble, n_list, n_samples: int, seed: int
) -> dict[int, MonteCarloResult]:
    """The utility-shift distribution at several chain lengths, same ensemble.

    Returns one MonteCarloResult per requested N, keyed by N; each run uses
    seed + its position in the list.
    """
    results: dict[int, MonteCarloResult] = {}
    for offset, n in enumerate(n_list):
        sized = replace(ensemble, n_sites=int(n))
        results[int(n)] = expected_utility(sized, n_samples, seed + offset)
    return results
