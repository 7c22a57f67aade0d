"""Brute-force cross-checks: dense diagonalization, game simulation, stencils.

Everything in this module deliberately avoids the free-fermion machinery so
it can arbitrate it.  The spin Hamiltonian

    H = -sum_j Z_j Z_{j+1} - sum_j g_j X_j     (ring, N <= 12)

is built in the computational basis with site j stored in bit j of the basis
index (little endian).  H commutes with the global spin flip P = prod_j X_j,
and for positive fields the ground state lies in the P = +1 sector, so the
ground state is computed in the symmetrized half-dimension basis
(|b> + |flip b>)/sqrt(2) and lifted back to the full register.  This keeps
the result deterministic even deep in the ferromagnet, where the two GHZ-like
states are degenerate to far beyond machine precision.

The parity game is simulated gate by gate: every promise input (even total),
a diag(1, i^{a_j}) phase on each qubit, a Hadamard on each qubit, then the
win condition sum_j b_j = (sum_j a_j)/2 mod 2 on the measured bits.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError
from .free_fermion import as_couplings

MAX_DENSE_SITES = 12
DEGENERACY_GAP = 1e-10


@dataclass(frozen=True)
class DenseState:
    """A pure state on n_qubits qubits in the computational basis."""

    amplitudes: np.ndarray
    n_qubits: int
    energy: float | None = None
    gap: float | None = None

    @property
    def degenerate(self) -> bool:
        """True when the sector gap is too small to trust excited-state splits."""
        return self.gap is not None and self.gap < DEGENERACY_GAP


def _popcounts(dim: int) -> np.ndarray:
    counts = np.zeros(dim, dtype=np.int64)
    idx = np.arange(dim)
    j = 0
    while (1 << j) < dim:
        counts += (idx >> j) & 1
        j += 1
    return counts


def dense_hamiltonian(couplings) -> np.ndarray:
    """The full 2^N x 2^N matrix of H, for commutator and spectrum checks."""
    g = as_couplings(couplings)
    n = g.size
    if n > MAX_DENSE_SITES:
        raise ValueError(f"dense construction capped at {MAX_DENSE_SITES} sites")
    dim = 1 << n
    idx = np.arange(dim)
    h = np.zeros((dim, dim))
    h[idx, idx] = _zz_diagonal(n, idx)
    for j in range(n):
        flipped = idx ^ (1 << j)
        h[flipped, idx] -= g[j]
    return h


def _zz_diagonal(n: int, idx: np.ndarray) -> np.ndarray:
    # -sum_j z_j z_{j+1} with z = +-1 read off the bits, periodic wrap
    z = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)[None, :]) & 1)
    return -np.sum(z * np.roll(z, -1, axis=1), axis=1)


def dense_ground_state(couplings) -> DenseState:
    """Even-sector ground state of the ring at fields g_j, by dense eigh.

    Diagonalizes in the spin-flip-symmetric basis of dimension 2^(N-1),
    lifts the lowest eigenvector to the full register, and fixes the global
    phase by making the largest-magnitude amplitude real positive.  The
    reported gap is the even-sector excitation gap; if it falls below the
    degeneracy threshold the state is flagged via DenseState.degenerate.
    """
    g = as_couplings(couplings)
    n = g.size
    if n > MAX_DENSE_SITES:
        raise ValueError(f"dense diagonalization capped at {MAX_DENSE_SITES} sites")
    dim = 1 << n
    full = dim - 1
    idx = np.arange(dim)
    reps = idx[idx < (idx ^ full)]
    pos = np.empty(dim, dtype=np.int64)
    pos[reps] = np.arange(reps.size)
    pos[reps ^ full] = np.arange(reps.size)

    h = np.zeros((reps.size, reps.size))
    h[np.arange(reps.size), np.arange(reps.size)] = _zz_diagonal(n, reps)
    for j in range(n):
        h[pos[reps ^ (1 << j)], np.arange(reps.size)] += -g[j]

    try:
        evals, evecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericsError("dense eigensolver failed") from exc

    psi = np.zeros(dim)
    psi[reps] = evecs[:, 0]
    psi[reps ^ full] = evecs[:, 0]
    psi /= math.sqrt(2.0)
    if psi[np.argmax(np.abs(psi))] < 0.0:
        psi = -psi
    return DenseState(
        amplitudes=psi.astype(complex),
        n_qubits=n,
        energy=float(evals[0]),
        gap=float(evals[1] - evals[0]),
    )


def ghz_overlaps(state: DenseState) -> tuple[float, float]:
    """(o+, o-): squared overlaps with the even and odd GHZ states."""
    a_zero = state.amplitudes[0]
    a_ones = state.amplitudes[-1]
    o_plus = 0.5 * abs(a_zero + a_ones) ** 2
    o_minus = 0.5 * abs(a_zero - a_ones) ** 2
    return float(o_plus), float(o_minus)


def _fwht(vec: np.ndarray) -> np.ndarray:
    """Normalized Walsh-Hadamard transform (Hadamard on every qubit)."""
    out = vec.copy()
    h = 1
    n = out.size
    while h < n:
        out = out.reshape(-1, 2 * h)
        top = out[:, :h].copy()
        out[:, :h] = top + out[:, h:]
        out[:, h:] = top - out[:, h:]
        out = out.reshape(-1)
        h *= 2
    return out / math.sqrt(n)


def simulate_bbt(state: DenseState) -> float:
    """Average winning probability of the measurement protocol on a state.

    Enumerates all even-weight inputs a.  For each, applies the per-qubit
    phase diag(1, i^{a_j}) and Hadamard, then sums the probability of output
    strings whose parity equals (sum_j a_j)/2 mod 2.  Exact up to roundoff;
    cost O(4^N) overall.
    """
    n = state.n_qubits
    if n < 3:
        raise ValueError("the parity game needs at least 3 players")
    dim = 1 << n
    psi = np.asarray(state.amplitudes, dtype=complex)
    if psi.shape != (dim,):
        raise ValueError("amplitude vector does not match the qubit count")
    pc = _popcounts(dim)
    even_out = pc % 2 == 0
    i_pow = 1j ** np.arange(4)
    idx = np.arange(dim)

    inputs = idx[pc % 2 == 0]
    total = 0.0
    for a in inputs:
        phase = i_pow[pc[np.bitwise_and(idx, a)] % 4]
        after = _fwht(psi * phase)
        weights = np.abs(after) ** 2
        target_even = (pc[a] // 2) % 2 == 0
        mask = even_out if target_even else ~even_out
        total += float(np.sum(weights[mask]))
    return total / inputs.size


def numerical_gradient(fn, g0, step: float) -> np.ndarray:
    """Central-difference gradient of a scalar function of the couplings."""
    g0 = np.asarray(g0, dtype=float)
    grad = np.empty(g0.size)
    for i in range(g0.size):
        e = np.zeros(g0.size)
        e[i] = step
        grad[i] = (fn(g0 + e) - fn(g0 - e)) / (2.0 * step)
    if not np.all(np.isfinite(grad)):
        raise NumericsError("non-finite value in finite-difference gradient")
    return grad


def numerical_hessian(fn, g0, step: float) -> np.ndarray:
    """Central-difference Hessian of a scalar function of the couplings.

    Standard four-point stencil on the off-diagonal, three-point on the
    diagonal; the result is exactly symmetric by construction.
    """
    g0 = np.asarray(g0, dtype=float)
    n = g0.size
    hess = np.empty((n, n))
    f0 = fn(g0)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        hess[i, i] = (fn(g0 + ei) - 2.0 * f0 + fn(g0 - ei)) / step**2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = step
            val = (
                fn(g0 + ei + ej) - fn(g0 + ei - ej) - fn(g0 - ei + ej) + fn(g0 - ei - ej)
            ) / (4.0 * step**2)
            hess[i, j] = hess[j, i] = val
    if not np.all(np.isfinite(hess)):
        raise NumericsError("non-finite value in finite-difference Hessian")
    return hess
