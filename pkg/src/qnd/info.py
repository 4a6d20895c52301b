"""Entropies and entropy inequalities. Every logarithm here is base 2."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

from .core import EIG_CLAMP, DimensionError

NEG_PROB_TOL = 1e-12
SUM_TOL = 1e-9
LATTICE_TOL = 1e-9
MAX_DENOMINATOR = 10**6


def clean_probabilities(p, name: str = "probabilities") -> np.ndarray:
    """Clamp jitter in [-1e-12, 0) to zero; reject anything more negative."""
    p = np.array(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name} contain non-finite values")
    if p.size and p.min() < -NEG_PROB_TOL:
        raise ValueError(f"{name} contain a negative entry {p.min():.3e}")
    return np.where(p < 0, 0.0, p)


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def shannon_entropy(p) -> float:
    p = clean_probabilities(p).reshape(-1)
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"probabilities sum to {p.sum()!r}")
    return _entropy_bits(p)


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary entropy argument {p!r} outside [0, 1]")
    return _entropy_bits(np.array([p, 1.0 - p]))


@dataclass(frozen=True, eq=False)
class JointTable:
    """Joint distribution over (row, column) outcome pairs."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        p = clean_probabilities(self.probs, "joint table")
        if p.ndim != 2:
            raise DimensionError(f"joint table must be 2-d, got shape {p.shape}")
        rows = tuple(str(s) for s in self.row_labels)
        cols = tuple(str(s) for s in self.col_labels)
        if p.shape != (len(rows), len(cols)):
            raise DimensionError(f"table shape {p.shape} does not match {len(rows)} x {len(cols)} labels")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"joint table sums to {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_array(cls, probs) -> "JointTable":
        p = np.asarray(probs, dtype=float)
        return cls(tuple(map(str, range(p.shape[0]))), tuple(map(str, range(p.shape[1]))), p)

    def row_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    def col_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def transpose(self) -> "JointTable":
        return JointTable(self.col_labels, self.row_labels, self.probs.T)


def _axis(given) -> int:
    if given in (0, "rows", "row"):
        return 0
    if given in (1, "cols", "col", "columns"):
        return 1
    raise ValueError(f"unknown conditioning axis {given!r}")


def conditional_entropy(t: JointTable, given="rows") -> float:
    """Entropy of the other variable given the ``given`` axis: H(joint) - H(given marginal).

    For a noise table (rows = outcomes m, columns = inputs x) the default gives H(X|M).
    """
    axis = _axis(given)
    marginal = t.probs.sum(axis=1 - axis)
    h = _entropy_bits(t.probs.reshape(-1)) - _entropy_bits(marginal)
    return max(h, 0.0)


def von_neumann_entropy(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    w = np.where(w < EIG_CLAMP, 0.0, w)
    return _entropy_bits(w)


def quantum_conditional_entropy(rho_ab, dims: Sequence[int]) -> float:
    """H(A|B) = H(AB) - H(B) for a state on A (x) B."""
    da, db = (int(d) for d in dims)
    rho_ab = np.asarray(rho_ab, dtype=complex)
    if rho_ab.shape != (da * db, da * db):
        raise DimensionError(f"state of shape {rho_ab.shape} does not live on {da} x {db}")
    rho_b = np.einsum("abac->bc", rho_ab.reshape(da, db, da, db))
    return von_neumann_entropy(rho_ab) - von_neumann_entropy(rho_b)


@dataclass(frozen=True)
class FanoBounds:
    p_e: float
    alphabet_size: int
    upper: float

    @property
    def gallager_floor(self) -> float:
        """Smallest noise compatible with p_e <= N/2."""
        return 2.0 * self.p_e

    def gallager_ok(self, noise: float, tol: float = 1e-12) -> bool:
        """Whether p_e <= noise/2 (the error probability achievable by a guess)."""
        return self.p_e <= noise / 2 + tol


def fano_bounds(p_e: float, alphabet_size: int) -> FanoBounds:
    """Fano ceiling h(p_e) + p_e log(|X| - 1) on the conditional entropy."""
    if not 0.0 <= p_e <= 1.0:
        raise ValueError(f"error probability {p_e!r} outside [0, 1]")
    if alphabet_size < 2:
        raise ValueError("alphabet needs at least two symbols")
    upper = binary_entropy(p_e) + p_e * np.log2(alphabet_size - 1)
    return FanoBounds(float(p_e), int(alphabet_size), float(upper))


def map_error_probability(t: JointTable, given="rows") -> float:
    """Error probability of the maximum a posteriori guess of the other variable from ``given``."""
    axis = _axis(given)
    best = t.probs.max(axis=1 - axis).sum()
    return float(min(max(1.0 - best, 0.0), 1.0))


def gallager_check(noise: float, p_e: float, tol: float = 1e-12) -> bool:
    return p_e <= noise / 2 + tol


def lattice_spacing(values, tol: float = LATTICE_TOL, max_denominator: int = MAX_DENOMINATOR) -> float | None:
    """Largest s > 0 with every pairwise difference of ``values`` an integer multiple of s.

    Ratios of differences are rationalized with a bounded denominator q and
    accepted when |q * ratio - p| <= tol, i.e. the tolerance is measured in
    lattice-index units.  Returns None when no such lattice exists, or when
    fewer than two distinct values are given.
    """
    v = np.unique(np.asarray(values, dtype=float))
    if v.size < 2:
        return None
    diffs = v[1:] - v[0]
    span = diffs[-1]
    numerators, denominators = [], []
    for r in diffs / span:
        frac = Fraction(float(r)).limit_denominator(max_denominator)
        if abs(frac.denominator * r - frac.numerator) > tol:
            return None
        numerators.append(frac.numerator)
        denominators.append(frac.denominator)
    lcm = 1
    for q in denominators:
        lcm = lcm * q // gcd(lcm, q)
    if lcm > max_denominator:
        return None
    g = 0
    for p, q in zip(numerators, denominators):
        g = gcd(g, p * (lcm // q))
    return float(span * g / lcm)


def entropy_variance_ceiling(variance: float, spacing: float) -> float:
    """1/2 log{2 pi e [Var/s^2 + 1/12]} for a variable living on a lattice of spacing s."""
    return 0.5 * float(np.log2(2 * np.pi * np.e * (variance / spacing**2 + 1.0 / 12)))


@dataclass(frozen=True)
class EntropyVarianceCheck:
    entropy: float
    ceiling: float
    spacing: float

    @property
    def holds(self) -> bool:
        return self.entropy <= self.ceiling + LATTICE_TOL


def entropy_variance_bound(values, probs, spacing: float | None = None) -> EntropyVarianceCheck:
    """Compare the entropy of a lattice-valued variable with its variance ceiling.

    ``spacing`` defaults to the lattice spacing of the values carrying
    probability (1 for a deterministic variable).
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    p = clean_probabilities(probs).reshape(-1)
    if values.shape != p.shape:
        raise DimensionError("values and probabilities differ in length")
    support = values[p > 0]
    if spacing is None:
        if np.unique(support).size < 2:
            spacing = 1.0
        else:
            spacing = lattice_spacing(support)
            if spacing is None:
                raise ValueError("values do not lie on a common lattice")
    else:
        if spacing <= 0:
            raise ValueError("spacing must be positive")
        idx = (support - support.min()) / spacing
        if np.abs(idx - np.rint(idx)).max(initial=0.0) > LATTICE_TOL:
            raise ValueError(f"values are not on a lattice of spacing {spacing!r}")
    mean = float(p @ values)
    var = float(p @ (values - mean) ** 2)
    return EntropyVarianceCheck(shannon_entropy(p), entropy_variance_ceiling(var, spacing), float(spacing))
