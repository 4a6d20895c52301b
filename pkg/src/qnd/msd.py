"""Mean-square-deviation noise and disturbance, and their operator forms at rho = 1/d.

The MSD noise accepts real-valued estimates f(m).  The MSD disturbance uses the
eigenvalue read off a Z measurement made after the correction, so its
estimates are always eigenvalues of Z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CpMap, DimensionError, Observable, QuantumInstrument, discard_flag
from .disturbance import CHECK_TOL, CheckResult, correction_guess, noise_table, output_ensemble, overlap_constant
from .info import JointTable, lattice_spacing

ESTIMATOR_KINDS = ("map-guess", "conditional-mean", "custom")


@dataclass(frozen=True)
class EstimatorMap:
    """Estimate f(m) of the observable's eigenvalue for each outcome label."""

    kind: str
    values: dict

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        object.__setattr__(self, "values", {str(k): float(v) for k, v in self.values.items()})

    def __call__(self, label: str) -> float:
        return self.values[label]

    def vector(self, labels) -> np.ndarray:
        missing = [lab for lab in labels if lab not in self.values]
        if missing:
            raise ValueError(f"estimator has no value for outcomes {missing}")
        return np.array([self.values[lab] for lab in labels])


def _eigenvalues(t: JointTable, eigenvalues) -> np.ndarray:
    ev = np.asarray(eigenvalues, dtype=float).reshape(-1)
    if ev.size != len(t.col_labels):
        raise DimensionError(f"{ev.size} eigenvalues for a table with {len(t.col_labels)} columns")
    return ev


def map_guess(t: JointTable, eigenvalues) -> EstimatorMap:
    """f(m) = eigenvalue of argmax_x p(x|m); ties go to the smallest index.

    Outcomes that never occur guess the first eigenvalue.
    """
    ev = _eigenvalues(t, eigenvalues)
    # np.argmax returns the first maximal index, which is the tie rule
    idx = np.argmax(t.probs, axis=1)
    return EstimatorMap("map-guess", {lab: ev[i] for lab, i in zip(t.row_labels, idx)})


def conditional_mean(t: JointTable, eigenvalues) -> EstimatorMap:
    ev = _eigenvalues(t, eigenvalues)
    pm = t.row_marginal()
    means = np.divide(t.probs @ ev, pm, out=np.zeros_like(pm), where=pm > 0)
    return EstimatorMap("conditional-mean", dict(zip(t.row_labels, means)))


def error_probability(t: JointTable, f: EstimatorMap, eigenvalues) -> float:
    """Pr{f(M) != X}."""
    ev = _eigenvalues(t, eigenvalues)
    est = f.vector(t.row_labels)
    wrong = ~np.isclose(est[:, None], ev[None, :], rtol=0.0, atol=1e-12)
    return float(t.probs[wrong].sum())


def v_noise(t: JointTable, f: EstimatorMap, eigenvalues) -> float:
    """sum_{m,x} p(m,x) [f(m) - xi_x]^2."""
    ev = _eigenvalues(t, eigenvalues)
    est = f.vector(t.row_labels)
    return float((t.probs * (est[:, None] - ev[None, :]) ** 2).sum())


def identity_correction(inst: QuantumInstrument) -> CpMap:
    if inst.dim_out != inst.dim_in:
        raise DimensionError("identity correction needs equal input and output dimensions")
    return discard_flag(inst.dim_out, inst.n_outcomes)


def disturbance_msd_table(inst: QuantumInstrument, z: Observable, correction: CpMap | None = None) -> JointTable:
    if correction is None:
        correction = identity_correction(inst)
    g = correction_guess(inst, z, correction)
    states = output_ensemble(inst, z)
    p = np.einsum("aij,bji->ab", g.effects, states).real
    return JointTable(z.labels, z.labels, p)


def v_disturbance(inst: QuantumInstrument, z: Observable, correction: CpMap | None = None) -> float:
    """sum_{zhat,z} p(zhat,z) [zeta_zhat - zeta_z]^2, identity correction by default."""
    t = disturbance_msd_table(inst, z, correction)
    ev = z.eigenvalues
    return float((t.probs * (ev[:, None] - ev[None, :]) ** 2).sum())


def ozawa_epsilon_sq(inst: QuantumInstrument, x: Observable, f: EstimatorMap) -> float:
    """Ozawa's squared noise at 1/d: (1/d) sum_m Tr[E_m (f(m) - X)^2], expanded."""
    d = inst.dim_in
    xm = x.matrix()
    fm = f.vector(inst.labels)
    effects = inst.effects()
    tr_e = np.einsum("mii->m", effects).real
    tr_ex = np.einsum("mij,ji->m", effects, xm).real
    return float((fm**2 @ tr_e - 2 * fm @ tr_ex + np.trace(xm @ xm).real) / d)


def ozawa_eta_sq(inst: QuantumInstrument, z: Observable) -> float:
    """Ozawa's squared disturbance at 1/d for the uncorrected output channel."""
    if inst.dim_out != inst.dim_in:
        raise DimensionError("disturbance of Z needs equal input and output dimensions")
    d = inst.dim_in
    phi = inst.output_channel()
    zm = z.matrix()
    val = np.trace(phi.dual(zm @ zm)) - 2 * np.trace(zm @ phi.dual(zm)) + np.trace(zm @ zm)
    return float(val.real / d)


def eigenvalue_spacing(obs: Observable) -> float | None:
    return lattice_spacing(obs.eigenvalues)


def msd_tradeoff_check(inst, x: Observable, z: Observable, f: EstimatorMap | None = None) -> CheckResult:
    """[V_N + s_X^2/12][V_D + s_Z^2/12] >= (s_X s_Z / (2 pi e c))^2 with identity correction."""
    s_x, s_z = eigenvalue_spacing(x), eigenvalue_spacing(z)
    if s_x is None or s_z is None:
        return CheckResult.skipped("msd_tradeoff", "eigenvalues do not lie on a lattice")
    if inst.dim_out != inst.dim_in:
        return CheckResult.skipped("msd_tradeoff", "output dimension differs from input")
    t = noise_table(inst, x)
    if f is None:
        f = map_guess(t, x.eigenvalues)
    vn = v_noise(t, f, x.eigenvalues)
    vd = v_disturbance(inst, z)
    lhs = (vn + s_x**2 / 12) * (vd + s_z**2 / 12)
    rhs = msd_tradeoff_rhs(s_x, s_z, overlap_constant(x, z))
    return CheckResult.from_margin("msd_tradeoff", lhs - rhs, CHECK_TOL, v_n=vn, v_d=vd, s_x=s_x, s_z=s_z, lhs=lhs, rhs=rhs)


def msd_tradeoff_rhs(s_x: float, s_z: float, c: float) -> float:
    return float((s_x * s_z / (2 * np.pi * np.e * c)) ** 2)
