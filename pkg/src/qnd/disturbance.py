"""Information-theoretic noise and disturbance of an instrument, and the tradeoff checks.

Noise tables have rows indexed by instrument outcomes m and columns by the
eigenstate index x of the probed observable, with a uniform prior over
eigenstates.  Disturbance tables have rows indexed by the guess and columns by
the eigenstate index z.

The disturbance minimizes H(Z|Zhat) over every correction channel followed by a
Z measurement.  Such a pair is the same thing as a d-outcome POVM on the
instrument output S' (x) M (pull the Z projectors back through the dual of the
correction; conversely a POVM {P_z} is the correction rho -> sum_z Tr[P_z rho]
|z><z| followed by Z).  The search therefore runs over POVMs.  It is not
convex, so only a bracket is reported: the conditional quantum entropy
H(Z|S'M) from below and the best POVM found from above.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import (
    COMPLETENESS_TOL,
    PSD_TOL,
    CpMap,
    DimensionError,
    Observable,
    QuantumInstrument,
    dagger,
    fidelity,
    infinity_norm,
    kron,
    maximally_entangled,
    partial_trace,
    projector,
    psd_inv_sqrt,
    psd_sqrt,
    stinespring_dilate,
)
from .info import (
    JointTable,
    conditional_entropy,
    fano_bounds,
    map_error_probability,
    quantum_conditional_entropy,
)

log = logging.getLogger(__name__)

CHECK_TOL = 1e-9
DEFAULT_RESTARTS = 32


class DegenerateObservableError(ValueError):
    pass


def _require_nondegenerate(obs: Observable, name: str) -> None:
    if not obs.is_nondegenerate:
        raise DegenerateObservableError(
            f"{name} is degenerate; use overlap_constant_degenerate / degenerate_noise instead"
        )


def _require_dims(inst: QuantumInstrument, obs: Observable, name: str) -> None:
    if obs.dim != inst.dim_in:
        raise DimensionError(f"{name} acts on dimension {obs.dim}, instrument input is {inst.dim_in}")


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one inequality or identity check.

    ``margin`` is signed so that a check passes iff ``margin >= -tol``.
    """

    name: str
    status: str
    margin: float | None = None
    values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @classmethod
    def from_margin(cls, name: str, margin: float, tol: float = CHECK_TOL, **values) -> "CheckResult":
        return cls(name, "pass" if margin >= -tol else "fail", float(margin), values)

    @classmethod
    def skipped(cls, name: str, reason: str) -> "CheckResult":
        return cls(name, "skipped", None, {"reason": reason})


@dataclass(frozen=True, eq=False)
class GuessPovm:
    """POVM on the instrument output S' (x) M whose outcome is the guess of z."""

    effects: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        e = np.array(self.effects, dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise DimensionError(f"effects must have shape (k, D, D), got {e.shape}")
        labels = tuple(str(s) for s in self.labels)
        if len(labels) != e.shape[0]:
            raise ValueError("one label per effect required")
        for lab, p in zip(labels, e):
            if np.abs(p - dagger(p)).max() > PSD_TOL:
                raise ValueError(f"effect {lab!r} is not Hermitian")
            if np.linalg.eigvalsh(0.5 * (p + dagger(p))).min() < -PSD_TOL:
                raise ValueError(f"effect {lab!r} is not positive semidefinite")
        if np.abs(e.sum(axis=0) - np.eye(e.shape[1])).max() > COMPLETENESS_TOL:
            raise ValueError("effects do not sum to the identity")
        e.setflags(write=False)
        object.__setattr__(self, "effects", e)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]


@dataclass(frozen=True, eq=False)
class DisturbanceBracket:
    lower: float
    upper: float
    witness: GuessPovm
    restarts_used: int
    candidates: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def overlap_constant(x: Observable, z: Observable) -> float:
    """c = max_{x,z} |<psi^x|phi^z>|^2."""
    _require_nondegenerate(x, "X")
    _require_nondegenerate(z, "Z")
    if x.dim != z.dim:
        raise DimensionError("observables act on different dimensions")
    overlaps = np.abs(x.eigenstates().conj() @ z.eigenstates().T) ** 2
    return float(overlaps.max())


def overlap_constant_degenerate(x: Observable, z: Observable) -> float:
    """c' = max_{x,z} ||X_x Z_z||_inf^2 over spectral projectors."""
    if x.dim != z.dim:
        raise DimensionError("observables act on different dimensions")
    return max(infinity_norm(p @ q) ** 2 for p in x.projectors for q in z.projectors)


def noise_table(inst: QuantumInstrument, x: Observable) -> JointTable:
    """p(m, x) = (1/d) Tr[M^m(|psi^x><psi^x|)]."""
    _require_nondegenerate(x, "X")
    return degenerate_noise_table(inst, x)


def degenerate_noise_table(inst: QuantumInstrument, x: Observable) -> JointTable:
    """p(m, x) = (d_x/d) Tr[M^m(X_x/d_x)] = (1/d) Tr[M^m(X_x)]."""
    _require_dims(inst, x, "X")
    d = inst.dim_in
    p = np.array([[np.trace(b(px)).real / d for px in x.projectors] for b in inst.branches])
    return JointTable(inst.labels, x.labels, p)


def noise(inst: QuantumInstrument, x: Observable) -> float:
    return conditional_entropy(noise_table(inst, x), given="rows")


def degenerate_noise(inst: QuantumInstrument, x: Observable) -> float:
    return conditional_entropy(degenerate_noise_table(inst, x), given="rows")


def output_ensemble(inst: QuantumInstrument, z: Observable) -> np.ndarray:
    """Subnormalized outputs (1/d) M(|phi^z><phi^z|) on S' (x) M, stacked over z."""
    _require_nondegenerate(z, "Z")
    _require_dims(inst, z, "Z")
    ch = inst.channel()
    return np.array([ch(p) for p in z.projectors]) / inst.dim_in


def _guess_table(effects: np.ndarray, states: np.ndarray) -> np.ndarray:
    return np.einsum("aij,bji->ab", effects, states).real


def _table_entropy(q: np.ndarray) -> float:
    q = np.where(q < 0, 0.0, q)
    q = q / q.sum()
    flat = q[q > 0]
    rows = q.sum(axis=1)
    rows = rows[rows > 0]
    return max(float(-(flat * np.log2(flat)).sum() + (rows * np.log2(rows)).sum()), 0.0)


def disturbance_table(inst: QuantumInstrument, z: Observable, g: GuessPovm) -> JointTable:
    """p(zhat, z) = (1/d) Tr[P^zhat M(|phi^z><phi^z|)]."""
    states = output_ensemble(inst, z)
    if g.dim != states.shape[1]:
        raise DimensionError(f"guess POVM acts on dimension {g.dim}, instrument output is {states.shape[1]}")
    if g.labels != z.labels:
        raise ValueError(f"guess labels {g.labels} do not match Z labels {z.labels}")
    return JointTable(g.labels, z.labels, _guess_table(g.effects, states))


def disturbance_given_guess(inst: QuantumInstrument, z: Observable, g: GuessPovm) -> float:
    """H(Z|Zhat) for the guess ``g``."""
    return conditional_entropy(disturbance_table(inst, z, g), given="rows")


def _cq_state(states: np.ndarray) -> np.ndarray:
    """sum_z |z><z| (x) states[z]."""
    k, dim = states.shape[0], states.shape[1]
    out = np.zeros((k * dim, k * dim), dtype=complex)
    for i, s in enumerate(states):
        out[i * dim:(i + 1) * dim, i * dim:(i + 1) * dim] = s
    return out


def quantum_lower_bound(inst: QuantumInstrument, z: Observable) -> float:
    """H(Z|S'M) of sum_z (1/d)|z><z| (x) M(|phi^z><phi^z|)."""
    states = output_ensemble(inst, z)
    h = quantum_conditional_entropy(_cq_state(states), (states.shape[0], states.shape[1]))
    return max(h, 0.0)


def _complete(effects: np.ndarray) -> np.ndarray:
    """Share the deficit 1 - sum(effects) equally among the effects."""
    dim = effects.shape[1]
    deficit = np.eye(dim) - effects.sum(axis=0)
    deficit = 0.5 * (deficit + dagger(deficit))
    return effects + deficit[None] / effects.shape[0]


def pretty_good_measurement(states: np.ndarray) -> np.ndarray:
    """PGM effects S^{-1/2} s_z S^{-1/2} for subnormalized states s_z, S = sum_z s_z.

    The kernel of S is split evenly so the effects sum to the identity.
    """
    s_inv = psd_inv_sqrt(states.sum(axis=0))
    effects = np.array([s_inv @ s @ s_inv for s in states])
    effects = 0.5 * (effects + dagger(effects))
    return _complete(effects)


def pgm_guess(inst: QuantumInstrument, z: Observable) -> GuessPovm:
    return GuessPovm(pretty_good_measurement(output_ensemble(inst, z)), z.labels)


def petz_correction(inst: QuantumInstrument, reference=None) -> CpMap:
    """Transpose-channel recovery of the instrument channel, S' (x) M -> S.

    R(s) = r^{1/2} M^*(M(r)^{-1/2} s M(r)^{-1/2}) r^{1/2} with the reference r
    defaulting to 1/d.  R is trace preserving on the support of M(r).
    """
    ch = inst.channel()
    d = inst.dim_in
    r = np.eye(d) / d if reference is None else np.asarray(reference, dtype=complex)
    r_half = psd_sqrt(r)
    out_inv = psd_inv_sqrt(ch(r))
    kraus = np.array([r_half @ dagger(k) @ out_inv for k in ch.kraus])
    return CpMap(kraus)


def correction_guess(inst: QuantumInstrument, z: Observable, correction: CpMap) -> GuessPovm:
    """POVM on S' (x) M equivalent to ``correction`` followed by a Z measurement."""
    d_out = inst.dim_out * inst.n_outcomes
    if correction.dim_in != d_out or correction.dim_out != z.dim:
        raise DimensionError(
            f"correction maps {correction.dim_in}->{correction.dim_out}, need {d_out}->{z.dim}"
        )
    effects = np.array([correction.dual(p) for p in z.projectors])
    effects = 0.5 * (effects + dagger(effects))
    return GuessPovm(_complete(effects), z.labels)


def _povm_from_params(params: np.ndarray, k: int, dim: int) -> np.ndarray:
    """Effects W_z^dagger W_z, W = A (L^dagger)^{-1} with A^dagger A = L L^dagger.

    ``params`` holds the real and imaginary parts of the stacked (k*dim, dim)
    matrix A; W is then an isometry and its blocks W_z give a POVM.
    """
    half = params.size // 2
    a = (params[:half] + 1j * params[half:]).reshape(k * dim, dim)
    chol = np.linalg.cholesky(a.conj().T @ a)
    w = a @ np.linalg.inv(chol).conj().T
    blocks = w.reshape(k, dim, dim)
    return blocks.conj().transpose(0, 2, 1) @ blocks


def _params_from_povm(effects: np.ndarray) -> np.ndarray:
    a = np.concatenate([psd_sqrt(e) for e in effects])
    flat = a.reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def refine_povm(
    states: np.ndarray,
    start: np.ndarray,
    rng: np.random.Generator,
    *,
    step: float = 0.2,
    min_step: float = 1e-4,
    batch: int = 24,
    tol: float = 1e-8,
    max_iter: int = 500,
) -> tuple[np.ndarray, float]:
    """Derivative-free descent of H(Z|Zhat) over POVMs.

    The POVM is the block decomposition of an isometry (Naimark form),
    parametrized by an unconstrained complex matrix.  Each iteration tries
    +/- ``step`` on ``batch`` randomly chosen real coordinates and keeps every
    improving move.  An iteration that gains less than ``tol`` bits halves the
    step; descent ends when the step drops below ``min_step`` or after
    ``max_iter`` iterations.
    """
    k, dim = states.shape[0], states.shape[1]
    x = np.array(start, dtype=float)
    flat_states = states.transpose(0, 2, 1).reshape(k, -1)

    def objective(p):
        try:
            effects = _povm_from_params(p, k, dim)
        except np.linalg.LinAlgError:
            return np.inf
        return _table_entropy((effects.reshape(k, -1) @ flat_states.T).real)

    best = objective(x)
    n = x.size
    for _ in range(max_iter):
        before = best
        for i in rng.permutation(n)[: min(batch, n)]:
            for delta in (step, -step):
                x[i] += delta
                val = objective(x)
                if val < best:
                    best = val
                    break
                x[i] -= delta
        if before - best < tol:
            step *= 0.5
            if step < min_step:
                break
    return _povm_from_params(x, k, dim), best


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 7])))


def optimize_disturbance(
    inst: QuantumInstrument,
    z: Observable,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> DisturbanceBracket:
    """Bracket D(M, Z) between H(Z|S'M) and the best guessing POVM found.

    Candidates are the pretty good measurement of the output ensemble, the
    Petz recovery followed by a Z measurement, a local polish of the better of
    those two, and ``restarts`` random POVMs each refined by local descent.
    The descent is skipped once the bracket has closed.
    """
    if restarts < 0:
        raise ValueError("restarts must be non-negative")
    states = output_ensemble(inst, z)
    k, dim = states.shape[0], states.shape[1]
    lower = quantum_lower_bound(inst, z)

    found: dict[str, tuple[float, np.ndarray]] = {}
    pgm = pretty_good_measurement(states)
    found["pgm"] = (_table_entropy(_guess_table(pgm, states)), pgm)
    petz = correction_guess(inst, z, petz_correction(inst)).effects
    found["petz"] = (_table_entropy(_guess_table(petz, states)), np.asarray(petz))

    def best():
        name = min(found, key=lambda n: found[n][0])
        return name, found[name][0]

    rng = _rng(seed)
    used = 0
    if best()[1] - lower > 1e-12:
        name, _ = best()
        effects, val = refine_povm(states, _params_from_povm(found[name][1]), rng)
        found["polished"] = (val, effects)
        for r in range(restarts):
            if best()[1] - lower <= 1e-12:
                break
            start = rng.standard_normal(2 * k * dim * dim)
            effects, val = refine_povm(states, start, rng)
            used += 1
            if "random" not in found or val < found["random"][0]:
                found["random"] = (val, effects)
    name, upper = best()
    witness = GuessPovm(found[name][1], z.labels)
    log.debug("disturbance bracket [%.6g, %.6g] from %s after %d restarts", lower, upper, name, used)
    return DisturbanceBracket(
        lower=lower,
        upper=upper,
        witness=witness,
        restarts_used=used,
        candidates={n: v for n, (v, _) in found.items()},
    )


def theorem1_check(inst, x, z, bracket: DisturbanceBracket) -> CheckResult:
    """N + D >= -log c through both ends of the bracket."""
    n = noise(inst, x)
    floor = float(-np.log2(overlap_constant(x, z)))
    upper_margin = n + bracket.upper - floor
    lower_margin = n + bracket.lower - floor
    return CheckResult.from_margin(
        "noise_disturbance_tradeoff",
        min(upper_margin, lower_margin),
        noise=n,
        disturbance_lower=bracket.lower,
        disturbance_upper=bracket.upper,
        floor=floor,
        upper_margin=upper_margin,
        lower_margin=lower_margin,
    )


def joint_noise_check(inst, x, z) -> CheckResult:
    """N(M,X) + N(M,Z) >= -log c, both read off the outcome alone."""
    nx, nz = noise(inst, x), noise(inst, z)
    floor = float(-np.log2(overlap_constant(x, z)))
    return CheckResult.from_margin("joint_measurement", nx + nz - floor, noise_x=nx, noise_z=nz, floor=floor)


def memory_eur_check(inst, x, z) -> CheckResult:
    """Uncertainty relation with quantum memory on the dilation R - S'M - E Mbar.

    Checks H(Z|S'M) + H(X|E Mbar) >= -log c and H(X|E Mbar) <= H(X|M).
    """
    _require_nondegenerate(x, "X")
    _require_nondegenerate(z, "Z")
    _require_dims(inst, x, "X")
    _require_dims(inst, z, "Z")
    d = inst.dim_in
    v = stinespring_dilate(inst)
    s_m = np.array([v.reduced(p, (0, 1)) for p in z.projectors]) / d
    e_mbar = np.array([v.reduced(p, (2, 3)) for p in x.projectors]) / d
    h_z = quantum_conditional_entropy(_cq_state(s_m), (d, s_m.shape[1]))
    h_x = quantum_conditional_entropy(_cq_state(e_mbar), (d, e_mbar.shape[1]))
    n = noise(inst, x)
    floor = float(-np.log2(overlap_constant(x, z)))
    eur_margin = h_z + h_x - floor
    dp_margin = n - h_x
    return CheckResult.from_margin(
        "quantum_memory_uncertainty",
        min(eur_margin, dp_margin),
        h_z_given_sm=h_z,
        h_x_given_embar=h_x,
        noise_x=n,
        floor=floor,
        eur_margin=eur_margin,
        data_processing_margin=dp_margin,
    )


def fidelity_error_identity(inst, z, correction: CpMap, tol: float = 1e-9) -> CheckResult:
    """1 - p_e of 'correct then measure Z' against the average correction fidelity."""
    table = disturbance_table(inst, z, correction_guess(inst, z, correction))
    success = float(np.trace(table.probs))
    ch = inst.channel()
    fids = []
    for p in z.projectors:
        recovered = correction(ch(p))
        fids.append(fidelity(recovered, p))
    avg = float(np.mean(fids))
    return CheckResult.from_margin(
        "fidelity_error_identity", tol - abs(success - avg), tol=0.0, success=success, average_fidelity=avg
    )


def ricochet_table(inst: QuantumInstrument, x: Observable) -> JointTable:
    """p(m, x) from |Phi+_RS>, measuring X^T on R and the instrument on S."""
    _require_nondegenerate(x, "X")
    _require_dims(inst, x, "X")
    d = inst.dim_in
    phi = maximally_entangled(d)
    rows = []
    for b in inst.branches:
        omega = sum(projector(kron(np.eye(d), k) @ phi) for k in b.kraus)
        on_r = partial_trace(omega, (d, inst.dim_out), (0,))
        rows.append([np.trace(p.T @ on_r).real for p in x.projectors])
    return JointTable(inst.labels, x.labels, np.array(rows))


def ricochet_equivalence(inst, x, tol: float = 1e-12) -> CheckResult:
    deviation = float(np.abs(noise_table(inst, x).probs - ricochet_table(inst, x).probs).max())
    return CheckResult.from_margin("ricochet_equivalence", tol - deviation, tol=0.0, max_deviation=deviation)


def fano_check(inst, x) -> CheckResult:
    """Error probability of the MAP guess against the noise, both directions.

    p_e <= N/2 (a guess this good exists) and N <= h(p_e) + p_e log(|X|-1).
    """
    t = noise_table(inst, x)
    n = conditional_entropy(t, given="rows")
    p_e = map_error_probability(t, given="rows")
    bounds = fano_bounds(p_e, len(t.col_labels))
    gallager_margin = n / 2 - p_e
    fano_margin = bounds.upper - n
    return CheckResult.from_margin(
        "fano_gallager",
        min(gallager_margin, fano_margin),
        noise=n,
        p_e=p_e,
        fano_upper=bounds.upper,
        gallager_margin=gallager_margin,
        fano_margin=fano_margin,
    )
