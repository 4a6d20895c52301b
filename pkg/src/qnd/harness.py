"""Analysis reports, randomized verification sweeps and parameter sweeps."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import Observable, QuantumInstrument
from .disturbance import (
    CHECK_TOL,
    DEFAULT_RESTARTS,
    CheckResult,
    fano_check,
    fidelity_error_identity,
    joint_noise_check,
    memory_eur_check,
    noise,
    noise_table,
    optimize_disturbance,
    overlap_constant,
    overlap_constant_degenerate,
    petz_correction,
    quantum_lower_bound,
    ricochet_equivalence,
    theorem1_check,
)
from .info import fano_bounds, map_error_probability
from .msd import (
    conditional_mean,
    map_guess,
    msd_tradeoff_check,
    ozawa_epsilon_sq,
    ozawa_eta_sq,
    v_disturbance,
    v_noise,
)
from .zoo import noisy_luders, pauli_observable, random_basis_pair, random_instrument, weak_measurement

REPORT_SCHEMA = "qnd-report/1"
OZAWA_TOL = 1e-10


@dataclass(frozen=True)
class CheckEntry:
    name: str
    status: str
    margin: float | None


@dataclass(frozen=True)
class MsdRecord:
    v_n: float
    v_d: float
    s_x: float
    s_z: float
    lhs: float
    rhs: float


@dataclass(frozen=True)
class AnalysisReport:
    instrument_id: str
    dims: tuple[int, ...]
    c: float
    c_prime: float | None
    noise_x: float
    noise_z: float
    disturbance_lower: float
    disturbance_upper: float
    p_e_map: float
    fano_upper: float
    msd: MsdRecord | None
    checks: tuple[CheckEntry, ...] = field(default_factory=tuple)

    @property
    def all_passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dims"] = list(self.dims)
        d["checks"] = [asdict(c) for c in self.checks]
        return {"schema": REPORT_SCHEMA, **d}

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        d = {k: v for k, v in d.items() if k != "schema"}
        d["dims"] = tuple(d["dims"])
        d["msd"] = None if d.get("msd") is None else MsdRecord(**d["msd"])
        d["checks"] = tuple(CheckEntry(**c) for c in d["checks"])
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """Two-column ``field,value`` listing; checks appear as ``check:<name>``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["field", "value"])
        for key, value in self.to_dict().items():
            if key == "checks":
                continue
            if key == "msd":
                for k, v in (value or {}).items():
                    w.writerow([f"msd.{k}", fmt(v)])
            elif key == "dims":
                w.writerow([key, "x".join(map(str, value))])
            else:
                w.writerow([key, fmt(value)])
        for c in self.checks:
            w.writerow([f"check:{c.name}", f"{c.status} {fmt(c.margin)}"])
        return buf.getvalue()


def fmt(v) -> str:
    """Round-trip formatting for numbers (17 significant digits)."""
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _entry(c: CheckResult) -> CheckEntry:
    return CheckEntry(c.name, c.status, c.margin)


def _ozawa_checks(inst, x, z, f) -> list[CheckResult]:
    out = []
    t = noise_table(inst, x)
    diff = abs(v_noise(t, f, x.eigenvalues) - ozawa_epsilon_sq(inst, x, f))
    out.append(CheckResult.from_margin("ozawa_epsilon", OZAWA_TOL - diff, tol=0.0, difference=diff))
    if inst.dim_out == inst.dim_in:
        diff = abs(v_disturbance(inst, z) - ozawa_eta_sq(inst, z))
        out.append(CheckResult.from_margin("ozawa_eta", OZAWA_TOL - diff, tol=0.0, difference=diff))
    else:
        out.append(CheckResult.skipped("ozawa_eta", "output dimension differs from input"))
    return out


def analyze(
    inst: QuantumInstrument,
    x: Observable,
    z: Observable,
    *,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    instrument_id: str = "instrument",
) -> AnalysisReport:
    """Noise, disturbance bracket and every applicable check for one apparatus."""
    c = overlap_constant(x, z)
    c_prime = overlap_constant_degenerate(x, z)
    t = noise_table(inst, x)
    n_x = noise(inst, x)
    n_z = noise(inst, z)
    bracket = optimize_disturbance(inst, z, restarts=restarts, seed=seed)
    p_e = map_error_probability(t)
    fano = fano_bounds(p_e, len(x.eigenvalues))

    checks = [
        CheckResult.from_margin("bracket_order", bracket.upper - bracket.lower),
        theorem1_check(inst, x, z, bracket),
        CheckResult.from_margin("certified_bound", n_x + bracket.lower + np.log2(c)),
        joint_noise_check(inst, x, z),
        memory_eur_check(inst, x, z),
        fano_check(inst, x),
        msd := msd_tradeoff_check(inst, x, z, map_guess(t, x.eigenvalues)),
        *_ozawa_checks(inst, x, z, map_guess(t, x.eigenvalues)),
        ricochet_equivalence(inst, x),
        fidelity_error_identity(inst, z, petz_correction(inst)),
    ]
    msd_record = None
    if msd.status != "skipped":
        msd_record = MsdRecord(**{k: float(msd.values[k]) for k in ("v_n", "v_d", "s_x", "s_z", "lhs", "rhs")})
    return AnalysisReport(
        instrument_id=instrument_id,
        dims=(inst.dim_in, inst.dim_out, inst.n_outcomes),
        c=float(c),
        c_prime=float(c_prime),
        noise_x=float(n_x),
        noise_z=float(n_z),
        disturbance_lower=float(bracket.lower),
        disturbance_upper=float(bracket.upper),
        p_e_map=float(p_e),
        fano_upper=float(fano.upper),
        msd=msd_record,
        checks=tuple(_entry(ch) for ch in checks),
    )


VERIFY_CHECKS = (
    "certified_bound",
    "joint_measurement",
    "quantum_memory_uncertainty",
    "fano_gallager",
    "msd_tradeoff",
    "ozawa_epsilon",
    "ozawa_eta",
)


def verify_trial(dim: int, seed: int, outcomes: int | None = None, kraus_per_outcome: int = 1) -> dict:
    """All bracket-free checks for one random instrument and basis pair.

    Returns margins keyed by check name, plus ``"<check>.<part>_margin"`` entries
    for the parts of compound checks.
    """
    inst = random_instrument(dim, outcomes, kraus_per_outcome, seed=seed)
    x, z = random_basis_pair(dim, seed=seed)
    c = overlap_constant(x, z)
    n_x = noise(inst, x)
    lower = quantum_lower_bound(inst, z)
    f_map = map_guess(noise_table(inst, x), x.eigenvalues)
    f_mean = conditional_mean(noise_table(inst, x), x.eigenvalues)
    results = [
        CheckResult.from_margin("certified_bound", n_x + lower + np.log2(c)),
        joint_noise_check(inst, x, z),
        memory_eur_check(inst, x, z),
        fano_check(inst, x),
        min(
            (msd_tradeoff_check(inst, x, z, f) for f in (f_map, f_mean)),
            key=lambda r: r.margin,
        ),
        *_ozawa_checks(inst, x, z, f_map),
    ]
    out = {r.name: r.margin for r in results}
    # sub-margins of compound checks, e.g. "quantum_memory_uncertainty.eur_margin"
    for r in results:
        out.update({f"{r.name}.{k}": float(v) for k, v in r.values.items() if k.endswith("_margin")})
    return out


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("QND_THREADS", "1")))
    except ValueError:
        return 1


def _run_trials(fn, arglist: list[tuple]) -> list:
    workers = min(_thread_count(), len(arglist)) if arglist else 1
    if workers <= 1:
        return [fn(*a) for a in arglist]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*arglist)))


def verify(dim: int, trials: int, seed: int = 0, outcomes: int | None = None, kraus_per_outcome: int = 1) -> dict:
    """Run ``trials`` random instances (trial i uses seed + i) and summarize violations."""
    if dim not in (2, 3, 4):
        raise ValueError("verification sweeps support dim 2, 3 or 4")
    start = time.perf_counter()
    margins = _run_trials(verify_trial, [(dim, seed + i, outcomes, kraus_per_outcome) for i in range(trials)])
    violations = {name: 0 for name in VERIFY_CHECKS}
    min_margin = {name: None for name in VERIFY_CHECKS}
    for m in margins:
        for name in VERIFY_CHECKS:
            value = m[name]
            if value is None:
                continue
            tol = 0.0 if name.startswith("ozawa") else CHECK_TOL
            if value < -tol:
                violations[name] += 1
            if min_margin[name] is None or value < min_margin[name]:
                min_margin[name] = value
    tightest = int(np.argmin([m["certified_bound"] for m in margins])) if margins else None
    return {
        "dim": dim,
        "trials": trials,
        "seed": seed,
        "outcomes": dim if outcomes is None else outcomes,
        "kraus_per_outcome": kraus_per_outcome,
        "violations": sum(violations.values()),
        "violations_by_check": violations,
        "min_margins": min_margin,
        "tightest_seed": None if tightest is None else seed + tightest,
        "elapsed_seconds": time.perf_counter() - start,
    }


SWEEP_FAMILIES = ("weak", "noisy-luders")
SWEEP_COLUMNS = ("param", "noise_x", "disturbance_lower", "disturbance_upper", "v_n", "v_d", "bound_margin")


def family_instrument(family: str, param: float) -> QuantumInstrument:
    """Qubit families measuring Pauli X; ``param`` is the strength or the flip probability."""
    x = pauli_observable("x")
    if family == "weak":
        return weak_measurement(x, param)
    if family == "noisy-luders":
        return noisy_luders(x, param)
    raise ValueError(f"unknown family {family!r}; choose from {', '.join(SWEEP_FAMILIES)}")


def sweep_row(family: str, param: float, restarts: int, seed: int) -> dict:
    x, z = pauli_observable("x"), pauli_observable("z")
    inst = family_instrument(family, param)
    t = noise_table(inst, x)
    n_x = noise(inst, x)
    bracket = optimize_disturbance(inst, z, restarts=restarts, seed=seed)
    return {
        "param": float(param),
        "noise_x": n_x,
        "disturbance_lower": bracket.lower,
        "disturbance_upper": bracket.upper,
        "v_n": v_noise(t, map_guess(t, x.eigenvalues), x.eigenvalues),
        "v_d": v_disturbance(inst, z),
        "bound_margin": n_x + bracket.lower + float(np.log2(overlap_constant(x, z))),
    }


def sweep(family: str, start: float, stop: float, steps: int, restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> list[dict]:
    if family not in SWEEP_FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(SWEEP_FAMILIES)}")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    params = np.linspace(start, stop, steps)
    return _run_trials(sweep_row, [(family, float(p), restarts, seed + i) for i, p in enumerate(params)])


def rows_to_csv(rows: list[dict], columns=SWEEP_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(float(r[c])) for c in columns])
    return buf.getvalue()
