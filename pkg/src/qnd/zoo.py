"""Canonical and random instruments and observables.

Random constructors take an integer seed and draw from a Philox generator, so
the same seed reproduces the same object bit for bit.
"""

from __future__ import annotations

import numpy as np

from .core import CpMap, Observable, QuantumInstrument, dagger

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# distinct streams keep e.g. an instrument and a basis pair drawn from one seed independent
_STREAM_INSTRUMENT, _STREAM_BASIS, _STREAM_CHANNEL = 0, 1, 2


def rng_from_seed(seed, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def pauli_observable(which: str) -> Observable:
    """Pauli observable with the +1 branch first."""
    m = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}[which.lower()]
    obs = Observable.from_hermitian(m)
    order = np.argsort(-obs.eigenvalues)
    return Observable(obs.eigenvalues[order], obs.projectors[order])


def luders(obs: Observable) -> QuantumInstrument:
    """Projective measurement rho -> P rho P, one outcome per spectral branch."""
    return QuantumInstrument(obs.labels, tuple(CpMap(p[None]) for p in obs.projectors))


def trivial_instrument(d: int) -> QuantumInstrument:
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return QuantumInstrument(("0",), (CpMap(np.eye(d)[None]),))


def unitary_instrument(u) -> QuantumInstrument:
    """Single outcome, rho -> U rho U^dagger."""
    u = np.asarray(u, dtype=complex)
    return QuantumInstrument(("0",), (CpMap(u[None]),))


def weak_measurement(obs: Observable, strength: float) -> QuantumInstrument:
    """Two-outcome unsharp measurement of a qubit observable.

    K_+ = sqrt((1+s)/2) P_0 + sqrt((1-s)/2) P_1 and K_- with s -> -s, where P_0
    and P_1 are the two spectral projectors in their stored order.
    """
    if obs.dim != 2 or len(obs.eigenvalues) != 2:
        raise ValueError("weak measurement is defined for nondegenerate qubit observables")
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"strength {strength!r} outside [0, 1]")
    p0, p1 = obs.projectors
    a, b = np.sqrt((1 + strength) / 2), np.sqrt((1 - strength) / 2)
    return QuantumInstrument(("+", "-"), (CpMap((a * p0 + b * p1)[None]), CpMap((b * p0 + a * p1)[None])))


def noisy_luders(obs: Observable, flip: float) -> QuantumInstrument:
    """Lueders measurement of a qubit observable whose reported outcome flips with probability ``flip``."""
    if obs.dim != 2 or len(obs.eigenvalues) != 2:
        raise ValueError("noisy Lueders measurement is defined for nondegenerate qubit observables")
    if not 0.0 <= flip <= 1.0:
        raise ValueError(f"flip probability {flip!r} outside [0, 1]")
    p0, p1 = obs.projectors
    keep, swap = np.sqrt(1 - flip), np.sqrt(flip)
    return QuantumInstrument(
        obs.labels,
        (CpMap(np.array([keep * p0, swap * p1])), CpMap(np.array([keep * p1, swap * p0]))),
    )


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random isometry C^cols -> C^rows from QR of a complex Gaussian matrix."""
    g = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases[None, :]


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return haar_isometry(d, d, rng)


def random_instrument(d: int, outcomes: int | None = None, kraus_per_outcome: int = 1, seed: int = 0) -> QuantumInstrument:
    """Instrument S -> S (same dimension) from a Haar isometry cut into Kraus blocks.

    Block ``m * kraus_per_outcome + k`` of d rows is Kraus operator k of outcome m.
    """
    outcomes = d if outcomes is None else outcomes
    if d < 1 or outcomes < 1 or kraus_per_outcome < 1:
        raise ValueError("all counts must be at least 1")
    v = haar_isometry(d * outcomes * kraus_per_outcome, d, rng_from_seed(seed, _STREAM_INSTRUMENT))
    blocks = v.reshape(outcomes, kraus_per_outcome, d, d)
    return QuantumInstrument(tuple(str(m) for m in range(outcomes)), tuple(CpMap(b) for b in blocks))


def random_channel(dim_in: int, dim_out: int, n_kraus: int = 2, seed: int = 0) -> CpMap:
    """Random CPTP map from a Haar isometry C^dim_in -> C^dim_out (x) C^n_kraus."""
    if dim_out * n_kraus < dim_in:
        raise ValueError(f"a channel {dim_in}->{dim_out} needs at least {-(-dim_in // dim_out)} Kraus operators")
    v = haar_isometry(dim_out * n_kraus, dim_in, rng_from_seed(seed, _STREAM_CHANNEL))
    return CpMap(v.reshape(n_kraus, dim_out, dim_in))


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def _fourier(d: int) -> np.ndarray:
    w = np.exp(2j * np.pi / d)
    return np.array([[w ** (j * k) for k in range(d)] for j in range(d)]) / np.sqrt(d)


def random_basis_pair(d: int, seed: int = 0, mub: bool = False) -> tuple[Observable, Observable]:
    """Two observables with eigenvalues 0..d-1 and random eigenbases.

    With ``mub=True`` (d = 2 or 3) the bases are the computational and Fourier
    bases under a common Haar rotation, so c = 1/d.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    rng = rng_from_seed(seed, _STREAM_BASIS)
    if mub:
        if d not in (2, 3):
            raise ValueError("the MUB option is available for d = 2 and 3")
        u = haar_unitary(d, rng)
        return Observable.from_basis(u), Observable.from_basis(u @ _fourier(d))
    return Observable.from_basis(haar_unitary(d, rng)), Observable.from_basis(haar_unitary(d, rng))
