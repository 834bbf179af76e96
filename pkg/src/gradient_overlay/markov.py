"""Analytic engine for the different-utility-count chain.

A node whose view holds m members performs a pure-death chain on the count
of different-utility members: from count k+1 it steps to k with probability
k*p_t (sampling one of the k same-utility nodes still outside the view) and
stays put otherwise, with count 1 absorbing.

State-vector convention: vector position j (1-based) represents count
X = m - j + 1, so position 1 is the worst state X = m and position m is the
absorbing state X = 1. Under that mapping the transition matrix is upper
bidiagonal and the absorbing target is the last unit vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .schedules import (
    ConstantSchedule,
    PolynomialDecaySchedule,
    SamplingSchedule,
    TabulatedSchedule,
)


def _chain_probabilities(schedule: SamplingSchedule, T: int, m: int) -> np.ndarray:
    """p_0..p_{T-1}, verified against the chain validity bound (m-1)p < 1."""
    ps = schedule.probabilities(0, T)
    bad = np.flatnonzero((ps <= 0.0) | ((m - 1) * ps >= 1.0))
    if bad.size:
        t = int(bad[0])
        raise ValueError(
            f"schedule invalid at t={t}: need 0 < (m-1)*p < 1, got p={ps[t]}, m={m}"
        )
    return ps


@dataclass(frozen=True)
class TransitionMatrix:
    """One-step matrix for a fixed p: diagonal 1-(m-row)p, superdiagonal
    (m-row)p, absorbing last row."""

    p: float
    entries: np.ndarray

    @property
    def m(self) -> int:
        return self.entries.shape[0]


def transition_matrix(m: int, p: float) -> TransitionMatrix:
    if m < 2:
        raise ValueError(f"need at least 2 states, got m={m}")
    if not (0.0 < p and (m - 1) * p < 1.0):
        raise ValueError(f"need 0 < p and (m-1)p < 1, got p={p}, m={m}")
    entries = np.zeros((m, m))
    rows = np.arange(m - 1)
    entries[rows, rows] = 1.0 - (m - 1 - rows) * p
    entries[rows, rows + 1] = (m - 1 - rows) * p
    entries[m - 1, m - 1] = 1.0
    entries.setflags(write=False)
    return TransitionMatrix(p=p, entries=entries)


@dataclass(frozen=True)
class Distribution:
    """Chain-state distribution under the position convention above.

    probs[j-1] (1-based position j) is the probability of count X = m - j + 1.
    The mass must sum to 1 within `tolerance` (1e-12 on the exact evolution
    path; the spectral path builds with a looser tolerance since its basis is
    ill-conditioned for larger m).
    """

    probs: np.ndarray
    tolerance: float = 1e-12

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.shape[0] < 2:
            raise ValueError("a distribution needs at least 2 states")
        if (probs < 0.0).any():
            raise ValueError(f"negative probability: min entry {probs.min()}")
        total = probs.sum()
        if abs(total - 1.0) > self.tolerance:
            raise ValueError(f"probabilities sum to {total}, off by more than {self.tolerance}")

    @property
    def m(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def at_count(cls, m: int, x: int) -> "Distribution":
        """Point mass on count X = x."""
        if not 1 <= x <= m:
            raise ValueError(f"count must lie in 1..{m}, got {x}")
        probs = np.zeros(m)
        probs[m - x] = 1.0
        return cls(probs)

    def prob_of_count(self, x: int) -> float:
        if not 1 <= x <= self.m:
            raise KeyError(f"count must lie in 1..{self.m}, got {x}")
        return float(self.probs[self.m - x])

    def counts(self) -> np.ndarray:
        """Chain counts by vector position: m, m-1, ..., 1."""
        return np.arange(self.m, 0, -1)


@dataclass(frozen=True)
class EigenSystem:
    """Closed-form left eigensystem of the one-step matrix.

    eigenvalues[i-1] = 1 - (m-i)p. vectors[i-1] is the left eigenvector for
    that eigenvalue under the normalization vectors[i-1][i-1] = 1; the
    vectors do not depend on p, are upper triangular, and carry integer
    entries; all rows but the last sum to 0 and the last row is the
    absorbing unit vector.
    """

    p: float
    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def m(self) -> int:
        return self.vectors.shape[0]


def eigenvector_basis(m: int) -> np.ndarray:
    """The p-independent left-eigenvector rows, from the triangular recurrence
    vec[i][j] = vec[i][j-1] * (m - j + 1) / (i - j) for j > i (1-based)."""
    if m < 2:
        raise ValueError(f"need at least 2 states, got m={m}")
    basis = np.zeros((m, m))
    for i in range(1, m + 1):
        basis[i - 1, i - 1] = 1.0
        for j in range(i + 1, m + 1):
            basis[i - 1, j - 1] = basis[i - 1, j - 2] * (m - j + 1) / (i - j)
    basis.setflags(write=False)
    return basis


def eigen_system(m: int, p: float) -> EigenSystem:
    if m < 2:
        raise ValueError(f"need at least 2 states, got m={m}")
    if p == 0.0:
        raise ValueError("p = 0 collapses the spectrum; eigenvectors are undefined")
    if not (0.0 < p and (m - 1) * p < 1.0):
        raise ValueError(f"need 0 < p and (m-1)p < 1, got p={p}, m={m}")
    i = np.arange(1, m + 1)
    eigenvalues = 1.0 - (m - i) * p
    eigenvalues.setflags(write=False)
    return EigenSystem(p=p, eigenvalues=eigenvalues, vectors=eigenvector_basis(m))


def decompose_initial(pi0: Distribution) -> np.ndarray:
    """Coefficients alpha with sum_i alpha[i] * basis[i] = pi0.

    The triangular system always has a unique solution (unit diagonal), and
    it has a cancellation-free closed form: the basis rows are signed
    binomials basis[i][j] = (-1)^(j-i) C(m-i, j-i), whose inverse is the
    unsigned binomial triangle, giving

        alpha[i] = sum_{j <= i} pi0[j] * C(m-j, i-j)

    with nonnegative terms only. Forward substitution computes the same
    vector but loses ~4^m in precision to cancellation; the positive sum is
    exactly conditioned, and makes the last coefficient literally the total
    mass (so the absorbing component is the last unit vector, exactly, for
    exactly-normalized input).
    """
    m = pi0.m
    probs = pi0.probs
    alpha = np.empty(m)
    for i in range(1, m + 1):
        alpha[i - 1] = math.fsum(
            probs[j - 1] * math.comb(m - j, i - j) for j in range(1, i + 1)
        )
    return alpha


def evolve_exact(pi0: Distribution, schedule: SamplingSchedule, T: int) -> Distribution:
    """Push pi0 through T one-step matrices (p_t read from the schedule).

    Uses the bidiagonal structure directly, so rows stay exactly stochastic;
    cost is O(m) per step.
    """
    if T < 0:
        raise ValueError(f"tick count must be nonnegative, got {T}")
    m = pi0.m
    probs = pi0.probs.copy()
    if T == 0:
        return Distribution(probs)
    ps = _chain_probabilities(schedule, T, m)
    j = np.arange(m)
    off_diag = np.zeros(m)
    for p in ps:
        diag = 1.0 - (m - 1 - j) * p
        diag[m - 1] = 1.0
        off_diag[1:] = probs[:-1] * (m - j[1:]) * p
        probs = probs * diag + off_diag
    return Distribution(probs)


_SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp splitting constant


def _two_prod(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Error-free product: returns (p, e) with p = fl(a*b) and p + e = a*b exactly."""
    p = a * b
    ah = _SPLITTER * a
    ah = ah - (ah - a)
    al = a - ah
    bh = _SPLITTER * b
    bh = bh - (bh - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def evolve_spectral(pi0: Distribution, schedule: SamplingSchedule, T: int) -> Distribution:
    """Closed-form evolution: expand pi0 in the eigenbasis, scale each
    component by its accumulated eigenvalue product, and recombine.

    The recombination sums signed terms orders of magnitude larger than the
    result (basis entries grow binomially in m), so every product is kept as
    an error-free (value, residual) pair and summed with fsum; the doubled
    precision costs a few extra flops per term and keeps the path usable
    through m = 20.
    """
    if T < 0:
        raise ValueError(f"tick count must be nonnegative, got {T}")
    m = pi0.m
    basis = eigenvector_basis(m)
    alpha = decompose_initial(pi0)
    # eigenvalue products, accumulated in double-double
    lam_hi = np.ones(m)
    lam_lo = np.zeros(m)
    if T > 0:
        ps = _chain_probabilities(schedule, T, m)
        gaps = m - np.arange(1, m + 1)
        for p in ps:
            lam = 1.0 - gaps * p
            hi, e = _two_prod(lam_hi, lam)
            e += lam_lo * lam
            lam_hi = hi + e
            lam_lo = e - (lam_hi - hi)
    sc_hi, sc_lo = _two_prod(alpha, lam_hi)
    sc_lo += alpha * lam_lo
    probs = np.empty(m)
    for j in range(m):
        col = basis[: j + 1, j]
        ph, pe = _two_prod(sc_hi[: j + 1], col)
        pe += sc_lo[: j + 1] * col
        probs[j] = math.fsum(np.concatenate((ph, pe)))
    # entries whose true value is ~0 can come out at float-noise level with
    # either sign; zero the tiny negatives and let the mass check absorb it
    probs = np.where((probs < 0.0) & (probs > -1e-10), 0.0, probs)
    return Distribution(probs, tolerance=1e-8)


class Verdict(Enum):
    ALMOST_SURE_CONVERGENCE = "almost_sure_convergence"
    NOT_ALMOST_SURE = "not_almost_sure"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ScheduleClassification:
    """Family-level verdict plus truncated numeric evidence.

    The verdict is decided symbolically from the schedule family (whether
    the total sampling mass diverges); the partial product of (1 - p_t) and
    partial sum of p_t over t = 0..horizon are reported as evidence only —
    no truncation can certify either limit.
    """

    verdict: Verdict
    residual_product: float
    sum_pt: float
    horizon: int


def classify_schedule(schedule: SamplingSchedule, horizon: int) -> ScheduleClassification:
    """Almost-sure absorption holds iff the p_t series diverges; decide by family.

    Constant schedules diverge. Polynomial decay diverges iff the exponent
    is at most 1. Finite tables with a held tail would also diverge, but the
    table is data, not a family, so they report Unknown.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    if isinstance(schedule, ConstantSchedule):
        verdict = Verdict.ALMOST_SURE_CONVERGENCE
    elif isinstance(schedule, PolynomialDecaySchedule):
        verdict = (
            Verdict.NOT_ALMOST_SURE
            if schedule.exponent > 1.0
            else Verdict.ALMOST_SURE_CONVERGENCE
        )
    elif isinstance(schedule, TabulatedSchedule):
        verdict = Verdict.UNKNOWN
    else:
        raise TypeError(f"unknown schedule type {type(schedule).__name__}")
    ps = schedule.probabilities(0, horizon + 1)
    residual = float(np.exp(np.log1p(-ps).sum()))
    return ScheduleClassification(
        verdict=verdict,
        residual_product=residual,
        sum_pt=float(ps.sum()),
        horizon=horizon,
    )


def expected_hitting_time(i: int, p: float) -> float:
    """Expected ticks for the count to first reach 1 from count i: the
    harmonic sum of 1..i-1 over p. Zero when already absorbed."""
    if i < 1:
        raise ValueError(f"start count must be at least 1, got {i}")
    if p <= 0.0:
        raise ValueError(f"probability must be positive, got {p}")
    return math.fsum(1.0 / n for n in range(1, i)) / p


def hitting_time_bound(m: int, p: float) -> float:
    """Closed-form upper bound (1 + ln(m-1))/p on the worst-start expected
    absorption time; tight at m = 2."""
    if m < 2:
        raise ValueError(f"need at least 2 states, got m={m}")
    if p <= 0.0:
        raise ValueError(f"probability must be positive, got {p}")
    return (1.0 + math.log(m - 1)) / p
