"""Response of the game utility to weak disorder in the transverse fields.

For fields g_j = gbar + delta_g_j the utility expands as

    u(g) = chi(gbar) + du1 + du2 + O(delta^3),
    du1 = (sum_j delta_g_j / N) chi'(gbar),
    du2 = (1/2) sum_{jl} delta_g_j delta_g_l h(j - l),

so the mean effect of zero-mean disorder with covariance C is
E[u] - chi(gbar) ~ (1/2) sum_{jl} C_{jl} h(j - l).  The ring-periodic kernel
h(d) is assembled in momentum space from the exact second variation of the
GHZ overlap product.  Its two extreme contractions have closed forms: the
all-ones covariance (perfectly correlated disorder) gives (sigma^2/2)
chi''(gbar), and the identity covariance (independent site noise) gives
(sigma^2/2) nabla^2 u(gbar).

Bookkeeping note for the kernel: the second variation of the winning
probability contains a term proportional to f_{p1} f_{p2} with no
(j - l)-dependence.  That term is (du1)^2 / (p - 1/2) in disguise, i.e. it
belongs to the square of the first variation, not to the Hessian of the
utility, and it is deliberately excluded from h(d).  Including it breaks the
contraction identities; the finite-difference Hessian test is the arbiter.

All per-mode quantities live on the positive antiperiodic wavenumbers.  The
building block is

    f_k(g) = g sin^2 k / (eps_k^2 (eps_k + 1 - g cos k)),

in terms of which chi'(g) = -sum_k f_k.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import NumericsError
from .free_fermion import allowed_wavenumbers, _dispersion

CONTRACTION_TOL = 1e-8


def f_k(g: float, k) -> np.ndarray:
    """Per-mode response coefficient of the clean utility at coupling g.

    Equal to -(1/eps_k) tan((theta_k - theta_k^0)/2) sin(theta_k), written in
    the subtraction-free form g sin^2 k / (eps^2 (eps + 1 - g cos k)).
    Accepts scalar or array k.
    """
    if g <= 0.0 or not math.isfinite(g):
        raise ValueError("coupling must be positive and finite")
    k = np.asarray(k, dtype=float)
    eps = _dispersion(g, k)
    sk = np.sin(k)
    return g * sk * sk / (eps * eps * (eps + 1.0 - g * np.cos(k)))


def _mode_arrays(g: float, n_sites: int):
    """(k, eps, f, cos_theta, sin_theta) over positive wavenumbers."""
    if g <= 0.0 or not math.isfinite(g):
        raise ValueError("coupling must be positive and finite")
    k = allowed_wavenumbers(n_sites)
    eps = _dispersion(g, k)
    ck = np.cos(k)
    sk = np.sin(k)
    f = g * sk * sk / (eps * eps * (eps + 1.0 - g * ck))
    return k, eps, f, (g - ck) / eps, sk / eps


def chi_prime(g: float, n_sites: int) -> float:
    """d chi / dg at uniform coupling g: -sum_{k>0} f_k(g)."""
    _, _, f, _, _ = _mode_arrays(g, n_sites)
    return -float(np.sum(f))


def chi_double_prime(g: float, n_sites: int) -> float:
    """d^2 chi / dg^2 at uniform coupling g.

    Mode sum of 2 f cos(theta)/eps - f^2/2 - sin^2(theta)/(2 eps^2); negative
    in the ferromagnet (risk averse), positive in the paramagnet, and
    ~ -N^2/8 at the critical point.
    """
    _, eps, f, ct, st = _mode_arrays(g, n_sites)
    terms = 2.0 * f * ct / eps - 0.5 * f * f - 0.5 * st * st / (eps * eps)
    return float(np.sum(terms))


def laplacian_u(g_bar: float, n_sites: int) -> float:
    """Trace of the utility Hessian, sum_j d^2 u / dg_j^2, at uniform g_bar.

    This is the closed-form contraction matching independent site noise:
    E[u] - chi ~ (sigma^2/2) laplacian_u.
    """
    _, eps, f, ct, _ = _mode_arrays(g_bar, n_sites)
    e1 = eps[:, None]
    e2 = eps[None, :]
    s = e1 + e2
    bracket = (
        -e1 * e2 * np.outer(f, f)
        + s * (ct[:, None] * f[None, :] + f[:, None] * ct[None, :])
        + (np.outer(ct, ct) - 1.0)
    )
    return (2.0 / n_sites) * float(np.sum(bracket / (s * s)))


@dataclass(frozen=True)
class HessianKernel:
    """Ring-periodic second derivative of u versus site separation."""

    base_coupling: float
    n_sites: int
    values: np.ndarray  # h(d) for d = 0..N-1; h(d) = h(N-d)

    def matrix(self) -> np.ndarray:
        """The full Hessian h((j - l) mod N) as an N x N array."""
        idx = np.arange(self.n_sites)
        return self.values[(idx[:, None] - idx[None, :]) % self.n_sites]


def hessian_kernel(g_bar: float, n_sites: int) -> HessianKernel:
    """Assemble h(d) = d^2 u / dg_j dg_{j+d} at uniform coupling g_bar.

    Momentum-space double sum with cos((p1 + p2) d) and cos((p1 - p2) d)
    weights.  Both p1 +- p2 are integer multiples of 2 pi / N, so the sum
    collapses onto N Fourier buckets first and the d-dependence is applied
    once per bucket; the result is identical to the direct triple loop.
    """
    k, eps, f, ct, st = _mode_arrays(g_bar, n_sites)
    theta = np.arctan2(st, ct)
    m = eps.size

    s = eps[:, None] + eps[None, :]
    s2 = s * s
    # tan((theta^0 - theta)/2) = eps f / sin(theta) = g sin k / (eps + 1 - g cos k)
    t_rev = g_bar * np.sin(k) / (eps + 1.0 - g_bar * np.cos(k))
    tt = np.outer(t_rev, t_rev)
    gg = t_rev / eps  # = f / sin(theta)
    g_sum = gg[None, :] + gg[:, None]
    g_diff = gg[None, :] - gg[:, None]
    th_diff = theta[None, :] - theta[:, None]
    th_sum = theta[None, :] + theta[:, None]

    sin2_diff = np.sin(th_diff / 2.0) ** 2
    sin2_sum = np.sin(th_sum / 2.0) ** 2
    # Weight of cos((p1 + p2) d): first-variation cross term excluded, see
    # the module docstring.
    a_plus = (tt - 1.0) * sin2_diff / s2 + np.sin(th_diff) * g_diff / (2.0 * s)
    # Weight of cos((p1 - p2) d)
    a_minus = -(tt + 1.0) * sin2_sum / s2 + np.sin(th_sum) * g_sum / (2.0 * s)

    idx = np.arange(m)
    bucket_plus = (idx[:, None] + idx[None, :] + 1) % n_sites
    bucket_minus = (idx[:, None] - idx[None, :]) % n_sites
    coeff = np.bincount(bucket_plus.ravel(), weights=a_plus.ravel(), minlength=n_sites)
    coeff += np.bincount(bucket_minus.ravel(), weights=a_minus.ravel(), minlength=n_sites)

    d = np.arange(n_sites)
    cos_table = np.cos((2.0 * np.pi / n_sites) * np.outer(d, np.arange(n_sites)))
    values = (2.0 / n_sites**2) * (cos_table @ coeff)
    # h(d) = h(N - d) holds exactly in the mode sum but the two cosine buckets
    # accumulate in different orders; average out the last-ulp residue so
    # matrix() is symmetric to the bit.
    values = 0.5 * (values + values[(-d) % n_sites])
    return HessianKernel(base_coupling=g_bar, n_sites=n_sites, values=values)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Disorder covariance C_{jl} with its generating parameters."""

    entries: np.ndarray
    sigma: float
    kind: str  # "perfect" | "iid" | "exponential"
    xi: float | None = None
    distance_mode: str = "linear"


def perfect_covariance(sigma: float, n_sites: int) -> CovarianceMatrix:
    """All-ones covariance sigma^2: one shared Gaussian shift on every site."""
    _check_sigma(sigma)
    return CovarianceMatrix(
        entries=sigma * sigma * np.ones((n_sites, n_sites)), sigma=sigma, kind="perfect"
    )


def iid_covariance(sigma: float, n_sites: int) -> CovarianceMatrix:
    """Diagonal covariance sigma^2 I: independent noise per site."""
    _check_sigma(sigma)
    return CovarianceMatrix(entries=sigma * sigma * np.eye(n_sites), sigma=sigma, kind="iid")


def exponential_covariance(
    sigma: float, xi: float, n_sites: int, distance_mode: str = "linear"
) -> CovarianceMatrix:
    """Exponentially correlated covariance sigma^2 exp(-|j - l| / xi).

    distance_mode "linear" uses the literal index separation |j - l|;
    "ring" uses min(|j - l|, N - |j - l|), which respects the periodic
    geometry of the chain.
    """
    _check_sigma(sigma)
    if xi <= 0.0 or not math.isfinite(xi):
        raise ValueError("correlation length must be positive and finite")
    if distance_mode not in ("linear", "ring"):
        raise ValueError(f"unknown distance_mode {distance_mode!r}")
    idx = np.arange(n_sites)
    dist = np.abs(idx[:, None] - idx[None, :]).astype(float)
    if distance_mode == "ring":
        dist = np.minimum(dist, n_sites - dist)
    return CovarianceMatrix(
        entries=sigma * sigma * np.exp(-dist / xi),
        sigma=sigma,
        kind="exponential",
        xi=xi,
        distance_mode=distance_mode,
    )


def _check_sigma(sigma: float):
    if sigma < 0.0 or not math.isfinite(sigma):
        raise ValueError("sigma must be non-negative and finite")


@dataclass(frozen=True)
class SecondVariationReport:
    """Mean second-order utility shift for one covariance."""

    g_bar: float
    n_sites: int
    kind: str
    sigma: float
    value: float  # E[u] - chi(gbar) to second order
    rescaled: float  # value / (N sigma^2)


def second_variation(g_bar: float, n_sites: int, covariance: CovarianceMatrix) -> SecondVariationReport:
    """Contract the Hessian kernel with a disorder covariance.

    du2 = (1/2) sum_{jl} C_{jl} h((j - l) mod N).  The rescaled field is
    du2 / (N sigma^2), the quantity plotted against coupling and
    correlation length.
    """
    c = covariance.entries
    if c.shape != (n_sites, n_sites):
        raise ValueError("covariance shape does not match the chain length")
    kernel = hessian_kernel(g_bar, n_sites)
    value = 0.5 * float(np.sum(c * kernel.matrix()))
    denom = n_sites * covariance.sigma**2
    return SecondVariationReport(
        g_bar=g_bar,
        n_sites=n_sites,
        kind=covariance.kind,
        sigma=covariance.sigma,
        value=value,
        rescaled=value / denom if denom > 0.0 else math.nan,
    )


def first_variation(g_bar: float, n_sites: int, delta_g) -> float:
    """First-order utility shift (sum_j delta_g_j / N) chi'(g_bar)."""
    delta = np.asarray(delta_g, dtype=float)
    if delta.shape != (n_sites,):
        raise ValueError("perturbation shape does not match the chain length")
    return float(np.mean(delta)) * chi_prime(g_bar, n_sites)


# ---------------------------------------------------------------------------
# Thermodynamic limit of the Laplacian


def _laplacian_bracket(p1: float, p2: float, g: float) -> float:
    e1 = math.sqrt(1.0 + g * g - 2.0 * g * math.cos(p1))
    e2 = math.sqrt(1.0 + g * g - 2.0 * g * math.cos(p2))
    s1, s2 = math.sin(p1), math.sin(p2)
    f1 = g * s1 * s1 / (e1 * e1 * (e1 + 1.0 - g * math.cos(p1)))
    f2 = g * s2 * s2 / (e2 * e2 * (e2 + 1.0 - g * math.cos(p2)))
    c1 = (g - math.cos(p1)) / e1
    c2 = (g - math.cos(p2)) / e2
    s = e1 + e2
    return (-e1 * e2 * f1 * f2 + s * (f2 * c1 + f1 * c2) + (c1 * c2 - 1.0)) / (s * s)


def laplacian_density_limit(g: float) -> float:
    """N -> infinity limit of laplacian_u(g, N) / N, as a double integral.

    (1/(2 pi^2)) integral over (0, pi)^2 of the Laplacian bracket.  The
    integrand peaks at the origin with scale |1 - g|, so both axes are split
    there for the adaptive quadrature.
    """
    if g <= 0.0 or g == 1.0 or not math.isfinite(g):
        raise ValueError("coupling must be positive, finite and away from 1")
    cut = min(0.5, max(10.0 * abs(1.0 - g), 1e-3))

    def inner(p1: float) -> float:
        val, _ = integrate.quad(
            _laplacian_bracket,
            0.0,
            np.pi,
            args=(p1, g),
            points=[cut],
            epsabs=1e-11,
            epsrel=1e-9,
            limit=200,
        )
        return val

    total, abserr = integrate.quad(
        inner, 0.0, np.pi, points=[cut], epsabs=1e-9, epsrel=1e-8, limit=200
    )
    if abserr > 1e-6:
        raise NumericsError(
            f"Laplacian double quadrature did not converge (error {abserr:.3e})"
        )
    return total / (2.0 * np.pi**2)


def laplacian_crossover_thermodynamic(bracket=(0.95, 0.998), tol: float = 1e-4) -> float:
    """Coupling where the thermodynamic Laplacian density changes sign.

    Below the crossover independent site noise lowers the expected utility,
    above it raises it.  Bisection to the requested tolerance; the default
    bracket straddles the known sign change just below the critical point.
    """
    lo, hi = bracket
    v_lo = laplacian_density_limit(lo)
    v_hi = laplacian_density_limit(hi)
    if not (v_lo < 0.0 < v_hi):
        raise NumericsError(
            f"Laplacian crossover not bracketed by ({lo}, {hi}): ({v_lo:.3e}, {v_hi:.3e})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if laplacian_density_limit(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
