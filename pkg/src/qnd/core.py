"""Operators, states, channels, instruments and dilations.

Matrices are plain ``complex128`` numpy arrays.  The structured types below
are frozen and hold read-only arrays, so they can be shared between threads.

Composite systems are ordered left to right in the Kronecker product.  The
Stinespring dilation of an instrument uses the fixed ordering
``S' (x) M (x) E (x) Mbar``: output system, outcome flag, environment, and the
environment's copy of the flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import prod
from string import ascii_letters
from typing import Callable, Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
PROJECTOR_TOL = 1e-9
COMPLETENESS_TOL = 1e-9
EIG_CLAMP = 1e-12


class DimensionError(ValueError):
    """Operand shapes do not fit together."""


class CompletenessError(ValueError):
    """Kraus operators violate the trace condition."""

    def __init__(self, residual: float, message: str | None = None):
        self.residual = float(residual)
        super().__init__(
            message or f"sum of K^dagger K differs from identity (residual norm {self.residual:.3e})"
        )


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def kron(a, b, *more) -> np.ndarray:
    """Kronecker product of two or more matrices (or column vectors)."""
    return reduce(np.kron, (np.asarray(x, dtype=complex) for x in (a, b, *more)))


def basis_ket(d: int, i: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def ket(amplitudes) -> np.ndarray:
    """Validate a unit vector and return it as a 1-d complex array."""
    v = np.array(amplitudes, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("ket has non-finite amplitudes")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"ket is not normalized (norm {norm!r})")
    return v


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return m.shape[0] == m.shape[1] and np.abs(m - dagger(m)).max() <= tol


def density_operator(m) -> np.ndarray:
    """Validate a density matrix (Hermitian, PSD, unit trace) and return it."""
    rho = as_matrix(m, "density operator")
    if rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density operator must be square, got {rho.shape}")
    if not is_hermitian(rho):
        raise ValueError("density operator is not Hermitian")
    rho = 0.5 * (rho + dagger(rho))
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -PSD_TOL:
        raise ValueError(f"density operator has negative eigenvalue {lo:.3e}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"density operator has trace {tr!r}")
    return rho


def hermitian_function(m: np.ndarray, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply ``fn`` to the spectrum of a Hermitian matrix.

    Eigenvalues below ``EIG_CLAMP`` are set to zero before ``fn`` sees them.
    """
    h = 0.5 * (m + dagger(m))
    w, u = np.linalg.eigh(h)
    w = np.where(w < EIG_CLAMP, 0.0, w)
    return (u * fn(w)) @ dagger(u)


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    return hermitian_function(m, np.sqrt)


def psd_inv_sqrt(m: np.ndarray) -> np.ndarray:
    """Pseudo-inverse square root, inverted on the support only."""

    def f(w):
        out = np.zeros_like(w)
        nz = w > 0
        out[nz] = 1.0 / np.sqrt(w[nz])
        return out

    return hermitian_function(m, f)


def support_projector(m: np.ndarray) -> np.ndarray:
    return hermitian_function(m, lambda w: (w > 0).astype(float))


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduce ``m`` on the tensor factors ``dims`` to the factors in ``keep``.

    The kept factors stay in their original order.
    """
    m = np.asarray(m, dtype=complex)
    dims = tuple(int(d) for d in dims)
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    total = prod(dims)
    if m.shape != (total, total):
        raise DimensionError(f"matrix of shape {m.shape} does not match factor dims {dims}")
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} factors")
    if 2 * n > len(ascii_letters):
        raise DimensionError("too many tensor factors")
    rows = list(ascii_letters[:n])
    cols = [ascii_letters[n + i] if i in keep else rows[i] for i in range(n)]
    out = [rows[i] for i in keep] + [cols[i] for i in keep]
    spec = "".join(rows) + "".join(cols) + "->" + "".join(out)
    reduced = np.einsum(spec, m.reshape(dims + dims))
    dk = prod(dims[i] for i in keep)
    return np.asarray(reduced).reshape(dk, dk)


def maximally_entangled(d: int) -> np.ndarray:
    """|Phi+> = d^{-1/2} sum_i |i>|i> on C^d (x) C^d."""
    if d < 2:
        raise ValueError("maximally entangled state needs d >= 2")
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2, clipped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"fidelity of shapes {rho.shape} and {sigma.shape}")
    r = psd_sqrt(rho)
    w = np.linalg.eigvalsh(0.5 * (r @ sigma @ r + dagger(r @ sigma @ r)))
    w = np.where(w < EIG_CLAMP, 0.0, w)
    f = np.sqrt(w).sum() ** 2
    return float(min(max(f, 0.0), 1.0))


def trace_distance(rho, sigma) -> float:
    w = np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma))
    return float(0.5 * np.abs(w).sum())


def infinity_norm(m) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(m, dtype=complex), 2))


@dataclass(frozen=True, eq=False)
class Observable:
    """Spectral decomposition ``sum_i eigenvalues[i] * projectors[i]``.

    Branches are kept in the order given; branch ``i`` carries label ``str(i)``
    unless ``labels`` says otherwise.
    """

    eigenvalues: np.ndarray
    projectors: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float).reshape(-1)
        ps = np.array(self.projectors, dtype=complex)
        if ps.ndim != 3 or ps.shape[0] != ev.size or ps.shape[1] != ps.shape[2]:
            raise DimensionError(
                f"need one square projector per eigenvalue, got {ev.size} eigenvalues and projectors of shape {ps.shape}"
            )
        if not np.all(np.isfinite(ev)) or not np.all(np.isfinite(ps)):
            raise ValueError("observable has non-finite entries")
        if len(np.unique(ev)) != ev.size:
            raise ValueError("eigenvalues must be pairwise distinct")
        d = ps.shape[1]
        for i, p in enumerate(ps):
            if np.abs(p - dagger(p)).max() > PROJECTOR_TOL or np.abs(p @ p - p).max() > PROJECTOR_TOL:
                raise ValueError(f"branch {i} is not an orthogonal projector")
            for j in range(i):
                if np.abs(p @ ps[j]).max() > PROJECTOR_TOL:
                    raise ValueError(f"projectors {j} and {i} are not orthogonal")
        if np.abs(ps.sum(axis=0) - np.eye(d)).max() > PROJECTOR_TOL:
            raise ValueError("projectors do not sum to the identity")
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(ev.size))
        if len(labels) != ev.size or len(set(labels)) != ev.size:
            raise ValueError("observable labels must be unique, one per eigenvalue")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "projectors", _frozen(ps))
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_vectors(cls, eigenvalues, vectors, labels=()) -> "Observable":
        """Nondegenerate observable from one eigenvector per eigenvalue (rows of ``vectors``)."""
        vs = np.array(vectors, dtype=complex)
        if vs.ndim != 2:
            raise DimensionError("vectors must be a 2-d array, one eigenvector per row")
        return cls(eigenvalues, np.array([projector(v) for v in vs]), labels)

    @classmethod
    def from_basis(cls, unitary, eigenvalues=None) -> "Observable":
        """Observable whose eigenvectors are the columns of ``unitary``."""
        u = as_matrix(unitary, "basis")
        if eigenvalues is None:
            eigenvalues = np.arange(u.shape[1], dtype=float)
        return cls.from_vectors(eigenvalues, u.T)

    @classmethod
    def from_hermitian(cls, matrix, tol: float = 1e-9) -> "Observable":
        """Group the spectrum of a Hermitian matrix into eigenspaces (eigenvalues within ``tol`` merge)."""
        h = as_matrix(matrix, "observable")
        if not is_hermitian(h, tol):
            raise ValueError("observable matrix is not Hermitian")
        w, u = np.linalg.eigh(0.5 * (h + dagger(h)))
        groups: list[list[int]] = []
        for i, x in enumerate(w):
            if groups and abs(x - w[groups[-1][0]]) <= tol:
                groups[-1].append(i)
            else:
                groups.append([i])
        ev = [float(np.mean(w[g])) for g in groups]
        ps = [u[:, g] @ dagger(u[:, g]) for g in groups]
        return cls(ev, ps)

    @property
    def dim(self) -> int:
        return self.projectors.shape[1]

    @property
    def degeneracies(self) -> np.ndarray:
        return np.rint(np.einsum("kii->k", self.projectors).real).astype(int)

    @property
    def is_nondegenerate(self) -> bool:
        return len(self.eigenvalues) == self.dim

    def eigenstates(self) -> np.ndarray:
        """Rows are the eigenvectors of a nondegenerate observable (phases arbitrary)."""
        if not self.is_nondegenerate:
            raise ValueError("eigenstates() requires a nondegenerate observable")
        out = np.empty((self.dim, self.dim), dtype=complex)
        for i, p in enumerate(self.projectors):
            col = np.argmax(np.linalg.norm(p, axis=0))
            v = p[:, col]
            out[i] = v / np.linalg.norm(v)
        return out

    def matrix(self) -> np.ndarray:
        return np.einsum("k,kij->ij", self.eigenvalues, self.projectors)


@dataclass(frozen=True, eq=False)
class CpMap:
    """Completely positive, trace-nonincreasing map in Kraus form.

    ``kraus`` has shape ``(n_kraus, dim_out, dim_in)``.
    """

    kraus: np.ndarray

    def __post_init__(self):
        k = np.array(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] < 1:
            raise DimensionError(f"Kraus stack must have shape (n, dout, din), got {k.shape}")
        if not np.all(np.isfinite(k)):
            raise ValueError("Kraus operators have non-finite entries")
        gram = np.einsum("kai,kaj->ij", k.conj(), k)
        top = np.linalg.eigvalsh(0.5 * (gram + dagger(gram))).max()
        if top > 1.0 + COMPLETENESS_TOL:
            raise CompletenessError(top - 1.0, f"CP map increases trace (largest eigenvalue of sum K^dagger K is {top!r})")
        object.__setattr__(self, "kraus", _frozen(k))

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    def __call__(self, rho) -> np.ndarray:
        return apply_cp_map(self, rho)

    def dual(self, y) -> np.ndarray:
        """Heisenberg-picture action sum_k K^dagger y K."""
        y = np.asarray(y, dtype=complex)
        return np.einsum("kai,ab,kbj->ij", self.kraus.conj(), y, self.kraus)

    def gram(self) -> np.ndarray:
        """sum_k K^dagger K (the effect of this branch)."""
        return self.dual(np.eye(self.dim_out))

    def choi(self) -> np.ndarray:
        """sum_ij |i><j| (x) Phi(|i><j|), input factor first."""
        vecs = np.transpose(self.kraus, (0, 2, 1)).reshape(self.kraus.shape[0], -1)
        return np.einsum("ka,kb->ab", vecs, vecs.conj())

    def compose(self, first: "CpMap") -> "CpMap":
        """The map ``self o first``."""
        if first.dim_out != self.dim_in:
            raise DimensionError(f"cannot compose {first.dim_out}-dim output with {self.dim_in}-dim input")
        ks = np.einsum("kab,lbc->klac", self.kraus, first.kraus)
        return CpMap(ks.reshape(-1, self.dim_out, first.dim_in))


def apply_cp_map(cp_map: CpMap, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (cp_map.dim_in, cp_map.dim_in):
        raise DimensionError(f"map expects a {cp_map.dim_in}-dim input, got shape {rho.shape}")
    k = cp_map.kraus
    return np.einsum("kai,ij,kbj->ab", k, rho, k.conj())


@dataclass(frozen=True, eq=False)
class QuantumInstrument:
    """Outcome-labelled CP maps whose sum is trace preserving."""

    labels: tuple[str, ...]
    branches: tuple[CpMap, ...]

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        branches = tuple(b if isinstance(b, CpMap) else CpMap(b) for b in self.branches)
        if not branches or len(labels) != len(branches):
            raise ValueError("instrument needs one label per branch and at least one branch")
        if len(set(labels)) != len(labels):
            raise ValueError(f"outcome labels must be unique, got {labels}")
        din, dout = branches[0].dim_in, branches[0].dim_out
        for lab, b in zip(labels, branches):
            if (b.dim_in, b.dim_out) != (din, dout):
                raise DimensionError(f"branch {lab!r} maps {b.dim_in}->{b.dim_out}, expected {din}->{dout}")
        total = sum(b.gram() for b in branches)
        residual = float(np.linalg.norm(total - np.eye(din), 2))
        if residual > COMPLETENESS_TOL:
            raise CompletenessError(residual)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "branches", branches)

    @classmethod
    def from_kraus(cls, kraus_per_outcome: Sequence, labels: Sequence[str] | None = None):
        if labels is None:
            labels = [str(i) for i in range(len(kraus_per_outcome))]
        return cls(tuple(labels), tuple(CpMap(k) for k in kraus_per_outcome))

    @property
    def dim_in(self) -> int:
        return self.branches[0].dim_in

    @property
    def dim_out(self) -> int:
        return self.branches[0].dim_out

    @property
    def n_outcomes(self) -> int:
        return len(self.branches)

    def effects(self) -> np.ndarray:
        """POVM elements E_m = (M^m)^*(1), stacked."""
        return np.array([b.gram() for b in self.branches])

    def outcome_probabilities(self, rho) -> np.ndarray:
        return np.array([np.trace(b(rho)).real for b in self.branches])

    def channel(self) -> CpMap:
        return instrument_channel(self)

    def output_channel(self) -> CpMap:
        """The map S -> S' obtained by discarding the outcome."""
        return CpMap(np.concatenate([b.kraus for b in self.branches]))

    def permuted(self, order: Sequence[int]) -> "QuantumInstrument":
        return QuantumInstrument(
            tuple(self.labels[i] for i in order), tuple(self.branches[i] for i in order)
        )


def instrument_channel(inst: QuantumInstrument) -> CpMap:
    """rho -> sum_m M^m(rho) (x) |m><m| as a CPTP map S -> S' (x) M."""
    n = inst.n_outcomes
    ks = [np.kron(k, basis_ket(n, m).reshape(-1, 1)) for m, b in enumerate(inst.branches) for k in b.kraus]
    return CpMap(np.array(ks))


def discard_flag(dim: int, n_outcomes: int) -> CpMap:
    """Tr_M as a map S' (x) M -> S'; the 'do nothing' correction."""
    eye = np.eye(dim)
    return CpMap(np.array([np.kron(eye, basis_ket(n_outcomes, m).reshape(1, -1)) for m in range(n_outcomes)]))


@dataclass(frozen=True, eq=False)
class Isometry:
    """V: H_S -> H_S' (x) H_M (x) H_E (x) H_Mbar."""

    matrix: np.ndarray
    factor_dims: tuple[int, int, int, int]
    input_dim: int

    def __post_init__(self):
        v = as_matrix(self.matrix, "isometry")
        dims = tuple(int(x) for x in self.factor_dims)
        if len(dims) != 4 or prod(dims) != v.shape[0]:
            raise DimensionError(f"factor dims {dims} do not match {v.shape[0]} rows")
        if dims[1] != dims[3]:
            raise DimensionError("flag register and its copy must have equal dimension")
        if v.shape[1] != self.input_dim:
            raise DimensionError(f"isometry has {v.shape[1]} columns, expected {self.input_dim}")
        err = np.abs(dagger(v) @ v - np.eye(self.input_dim)).max()
        if err > NORM_TOL:
            raise ValueError(f"V^dagger V differs from identity by {err:.3e}")
        object.__setattr__(self, "matrix", _frozen(v))
        object.__setattr__(self, "factor_dims", dims)

    def conjugate(self, rho) -> np.ndarray:
        v = self.matrix
        return v @ np.asarray(rho, dtype=complex) @ dagger(v)

    def reduced(self, rho, keep: Iterable[int]) -> np.ndarray:
        """Marginal of V rho V^dagger on factor indices ``keep`` (0=S', 1=M, 2=E, 3=Mbar)."""
        return partial_trace(self.conjugate(rho), self.factor_dims, keep)


def stinespring_dilate(inst: QuantumInstrument) -> Isometry:
    """V|psi> = sum_{m,k} K_{m,k}|psi> (x) |m> (x) |e(m,k)> (x) |m>.

    The environment has one level per Kraus operator of the whole instrument,
    with e(m,k) counting them in branch order.
    """
    n = inst.n_outcomes
    e = sum(b.kraus.shape[0] for b in inst.branches)
    v = np.zeros((inst.dim_out * n * e * n, inst.dim_in), dtype=complex)
    level = 0
    for m, b in enumerate(inst.branches):
        flag = basis_ket(n, m).reshape(-1, 1)
        for op in b.kraus:
            v += kron(op, flag, basis_ket(e, level).reshape(-1, 1), flag)
            level += 1
    return Isometry(v, (inst.dim_out, n, e, n), inst.dim_in)
