"""Speed-limit lower bounds on evolution time.

For an observable A_t evolving under the adjoint generator,

    T_Q = sqrt(Q(A_0, A_T)) / (sqrt(2) <<||[A_0, L^dag(A_t)]||_HS>>_T)

and its reference-observable and skew-information variants; for a state
trajectory, the coherence bound

    T_C = sqrt(2) |sqrt(C(rho_0)) - sqrt(C(rho_T))|
          / << sqrt(sum_k ||[d/dt sqrt(rho_t), |k><k|]||_HS^2) >>_T.

All time averages <<.>>_T use cumulative Simpson weights on the propagation
grid (odd prefixes integrate the local interpolating parabola over the final
half panel, so saturated bounds stay exact to quadrature order at every
endpoint).  The tight sqrt(2) constants follow from integrating the
instantaneous rate inequalities; the weaker printed factor-2 variants are
available behind ``loose_prefactor`` for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dynamics, measures, opalg

DEFAULT_TOLERANCE = 1e-9
SINGULAR_PAIR_ATOL = 1e-8
RANK_DEFICIENT_MIX = 1e-9
RATE_CHECK_SLACK = 1e-6

QUANTUMNESS = "quantumness"
QUANTUMNESS_REFERENCE = "quantumness_reference"
SKEW_INFORMATION = "skew_information"
COHERENCE = "coherence"
BOUND_KINDS = (QUANTUMNESS, QUANTUMNESS_REFERENCE, SKEW_INFORMATION, COHERENCE)


class SingularPairError(ValueError):
    """The Sylvester system for d/dt sqrt(rho) is singular on the kernel."""


def prefix_integrals(samples, dt: float) -> np.ndarray:
    """Cumulative integral of grid samples at every node.

    Even prefixes are composite Simpson.  An odd prefix adds the trailing
    panel integrated with interpolating-cubic weights: the cubic through the
    first four nodes for the t_1 prefix, and for later odd prefixes the
    cubic through the four nodes ending at the endpoint (one-sided, so the
    estimate never samples past the endpoint where the integrand may lose
    smoothness).  Short inputs fall back to quadratic/trapezoid weights.
    """
    f = np.asarray(samples, dtype=float)
    n = f.size
    if n < 2:
        raise ValueError("need at least 2 samples")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    out = np.empty(n)
    out[0] = 0.0
    for k in range(2, n, 2):
        out[k] = out[k - 2] + dt / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k])
    for k in range(1, n, 2):
        if k >= 3:
            out[k] = out[k - 1] + dt / 24.0 * (f[k - 3] - 5.0 * f[k - 2]
                                               + 19.0 * f[k - 1] + 9.0 * f[k])
        elif n >= 4:
            out[k] = dt / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        elif n == 3:
            out[k] = dt / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
        else:
            out[k] = 0.5 * dt * (f[0] + f[1])
    return out


def time_average(samples, dt: float) -> float:
    """(1/T) integral over the full grid span."""
    f = np.asarray(samples, dtype=float)
    return float(prefix_integrals(f, dt)[-1] / ((f.size - 1) * dt))


def sqrtm_derivative(rho, drho, *, pair_atol: float = SINGULAR_PAIR_ATOL) -> np.ndarray:
    """Hermitian X solving X sqrt(rho) + sqrt(rho) X = drho.

    In the eigenbasis of rho, X_ij = drho_ij / (sqrt(l_i) + sqrt(l_j)).
    Pairs with sqrt(l_i) + sqrt(l_j) < pair_atol are set to zero when the
    matching drho entry is negligible and raise SingularPairError otherwise.
    """
    rho_m = opalg.assert_hermitian(rho, atol=1e-10)
    dr_m = opalg.assert_hermitian(drho, atol=1e-10)
    if rho_m.shape != dr_m.shape:
        raise opalg.OperatorError("rho and drho dimensions differ")
    if abs(complex(np.trace(dr_m))) > 1e-8:
        raise opalg.OperatorError("drho is not traceless")
    w, v = np.linalg.eigh(rho_m)
    if w[0] < -opalg.PSD_EIG_ATOL:
        raise opalg.OperatorError(f"rho is not PSD (eigenvalue {w[0]:.3e})")
    sq = np.sqrt(np.maximum(w, 0.0))
    denom = sq[:, None] + sq[None, :]
    dr_eig = v.conj().T @ dr_m @ v
    singular = denom < pair_atol
    if np.any(singular & (np.abs(dr_eig) > pair_atol)):
        worst = float(np.max(np.abs(dr_eig)[singular]))
        raise SingularPairError(
            f"kernel pair with |drho| = {worst:.3e} exceeds {pair_atol:.1e}"
        )
    x_eig = np.where(singular, 0.0, dr_eig / np.where(singular, 1.0, denom))
    x = v @ x_eig @ v.conj().T
    return 0.5 * (x + x.conj().T)


@dataclass(frozen=True)
class BoundRow:
    t: float
    measure_value: float
    t_qsl: float
    ratio: float
    flag: str = ""


@dataclass(frozen=True)
class RateCheck:
    holds: bool
    max_excess: float
    worst_t: float


@dataclass(frozen=True)
class BoundReport:
    bound_kind: str
    tolerance: float
    rows: tuple
    all_valid: bool
    loose_prefactor: bool = False
    warnings: tuple = field(default_factory=tuple)
    rate_check: RateCheck | None = None

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows])


def _assemble(kind, times, measures_by_node, numerators, denom_samples, dt,
              tolerance, denom_const, loose_prefactor, warnings, rate_check=None,
              extra_flags=None) -> BoundReport:
    integrals = prefix_integrals(denom_samples, dt)
    rows = []
    all_valid = True
    for k in range(1, len(times)):
        t = float(times[k])
        num = float(numerators[k])
        avg = integrals[k] / t
        flag = "" if extra_flags is None else extra_flags.get(k, "")
        avg = float(avg)
        if num == 0.0:
            t_qsl = 0.0
        elif avg <= 0.0:
            t_qsl = float("inf")
            flag = (flag + ";" if flag else "") + "zero_denominator"
        else:
            t_qsl = num / (denom_const * avg)
        valid = bool(t_qsl <= t * (1.0 + tolerance))
        all_valid = all_valid and valid
        rows.append(BoundRow(t=t, measure_value=float(measures_by_node[k]),
                             t_qsl=float(t_qsl), ratio=float(t_qsl / t), flag=flag))
    return BoundReport(bound_kind=kind, tolerance=tolerance, rows=tuple(rows),
                       all_valid=all_valid, loose_prefactor=loose_prefactor,
                       warnings=tuple(warnings), rate_check=rate_check)


def _check_observable_inputs(traj: dynamics.Trajectory, gen: dynamics.Generator,
                             grid: dynamics.TimeGrid):
    if gen.picture != dynamics.HEISENBERG:
        raise ValueError("observable bounds need a Heisenberg-picture generator")
    if traj.picture != dynamics.HEISENBERG:
        raise ValueError("observable bounds need a Heisenberg-picture trajectory")
    if traj.times.size != grid.times.size or not np.allclose(traj.times, grid.times):
        raise ValueError("trajectory grid does not match the supplied TimeGrid")


def bound_quantumness(a0, traj: dynamics.Trajectory, gen: dynamics.Generator,
                      grid: dynamics.TimeGrid, *, tolerance: float = DEFAULT_TOLERANCE,
                      loose_prefactor: bool = False) -> BoundReport:
    """Theorem-style bound on generating quantumness Q(A_0, A_T)."""
    _check_observable_inputs(traj, gen, grid)
    a0m = opalg.assert_hermitian(a0)
    q_vals = np.array([measures.quantumness(a0m, a) for a in traj.states])
    denom = np.array([
        opalg.hs_norm(opalg.commutator(a0m, dynamics.apply_generator(gen, a, t)))
        for t, a in zip(traj.times, traj.states)
    ])
    const = 2.0 if loose_prefactor else np.sqrt(2.0)
    return _assemble(QUANTUMNESS, traj.times, q_vals, np.sqrt(q_vals), denom,
                     grid.dt, tolerance, const, loose_prefactor, traj.warnings)


def bound_quantumness_reference(b0, traj: dynamics.Trajectory, gen: dynamics.Generator,
                                grid: dynamics.TimeGrid, *,
                                tolerance: float = DEFAULT_TOLERANCE,
                                loose_prefactor: bool = False) -> BoundReport:
    """Corollary variant against a fixed reference observable B_0."""
    _check_observable_inputs(traj, gen, grid)
    b0m = opalg.assert_hermitian(b0)
    q_vals = np.array([measures.quantumness(b0m, a) for a in traj.states])
    nums = np.abs(np.sqrt(q_vals) - np.sqrt(q_vals[0]))
    denom = np.array([
        opalg.hs_norm(opalg.commutator(b0m, dynamics.apply_generator(gen, a, t)))
        for t, a in zip(traj.times, traj.states)
    ])
    const = 2.0 if loose_prefactor else np.sqrt(2.0)
    return _assemble(QUANTUMNESS_REFERENCE, traj.times, q_vals, nums, denom,
                     grid.dt, tolerance, const, loose_prefactor, traj.warnings)


def bound_skew_information(rho, traj: dynamics.Trajectory, gen: dynamics.Generator,
                           grid: dynamics.TimeGrid, *,
                           tolerance: float = DEFAULT_TOLERANCE,
                           loose_prefactor: bool = False) -> BoundReport:
    """Corollary bound on changing the skew information I(rho, A_t)."""
    _check_observable_inputs(traj, gen, grid)
    rho_m = opalg.assert_density(rho)
    root = opalg.sqrtm_psd(rho_m)
    i_vals = np.array([
        0.5 * opalg.hs_norm(opalg.commutator(root, a)) ** 2 for a in traj.states
    ])
    nums = np.sqrt(2.0) * np.abs(np.sqrt(i_vals) - np.sqrt(i_vals[0]))
    denom = np.array([
        opalg.hs_norm(opalg.commutator(root, dynamics.apply_generator(gen, a, t)))
        for t, a in zip(traj.times, traj.states)
    ])
    const = 2.0 if loose_prefactor else 1.0
    return _assemble(SKEW_INFORMATION, traj.times, i_vals, nums, denom,
                     grid.dt, tolerance, const, loose_prefactor, traj.warnings)


def projector_commutator_sq(x, basis: measures.Basis) -> float:
    """sum_k ||[X, |k><k|]||_HS^2 = 2 sum_{i != j} |X_ij|^2 in the basis."""
    xb = basis.transform(x)
    ab = np.abs(xb) ** 2
    return 2.0 * float(np.sum(ab) - np.trace(ab).real)


def _coherence_integrand_samples(traj, gen, basis):
    """Integrand sqrt(sum_k ||[d/dt sqrt(rho), P_k]||^2) at each node.

    Rank-deficient interior nodes are retried with an epsilon of the
    maximally mixed state blended in; a singular t=0 node falls back to the
    one-sided value at t_0 + dt.  Both fallbacks are recorded.
    """
    n = traj.times.size
    dim = traj.states.shape[1]
    samples = np.empty(n)
    warnings = []
    pending_t0 = False
    for k in range(n):
        rho_k = traj.states[k]
        drho_k = dynamics.apply_generator(gen, rho_k, float(traj.times[k]))
        try:
            x = sqrtm_derivative(rho_k, drho_k)
        except SingularPairError:
            if k == 0:
                pending_t0 = True
                samples[0] = np.nan
                warnings.append("one_sided_t0")
                continue
            mixed = (1.0 - RANK_DEFICIENT_MIX) * rho_k \
                + RANK_DEFICIENT_MIX * np.eye(dim) / dim
            x = sqrtm_derivative(mixed, drho_k)
            warnings.append(f"regularized_node_{k}")
        samples[k] = np.sqrt(projector_commutator_sq(x, basis))
    if pending_t0:
        samples[0] = samples[1]
    return samples, warnings


def bound_coherence(rho_traj: dynamics.Trajectory, gen: dynamics.Generator,
                    basis: measures.Basis, grid: dynamics.TimeGrid, *,
                    tolerance: float = DEFAULT_TOLERANCE,
                    loose_prefactor: bool = False) -> BoundReport:
    """Theorem bound on changing the skew-information coherence C(rho_t).

    Also evaluates the instantaneous rate inequality
    |dC/dt| <= sqrt(2) sqrt(sum_k ||[d/dt sqrt(rho), P_k]||^2) sqrt(C)
    at every interior node with finite-difference dC/dt.
    """
    if gen.picture != dynamics.SCHRODINGER:
        raise ValueError("the coherence bound needs a Schrodinger-picture generator")
    if rho_traj.picture != dynamics.SCHRODINGER:
        raise ValueError("the coherence bound needs a state trajectory")
    if rho_traj.times.size != grid.times.size or not np.allclose(rho_traj.times, grid.times):
        raise ValueError("trajectory grid does not match the supplied TimeGrid")

    c_vals = np.array([measures.coherence(r, basis) for r in rho_traj.states])
    samples, reg_warnings = _coherence_integrand_samples(rho_traj, gen, basis)
    nums = np.sqrt(2.0) * np.abs(np.sqrt(c_vals) - np.sqrt(c_vals[0]))

    max_excess = -np.inf
    worst_t = 0.0
    dt = grid.dt
    for k in range(1, len(c_vals) - 1):
        dc = (c_vals[k + 1] - c_vals[k - 1]) / (2.0 * dt)
        rhs = np.sqrt(2.0) * samples[k] * np.sqrt(c_vals[k])
        excess = abs(dc) - rhs - RATE_CHECK_SLACK * (1.0 + abs(dc))
        if excess > max_excess:
            max_excess = excess
            worst_t = float(rho_traj.times[k])
    rate_check = RateCheck(holds=bool(max_excess <= 0.0), max_excess=float(max_excess),
                           worst_t=worst_t)

    const = 2.0 if loose_prefactor else 1.0
    return _assemble(COHERENCE, rho_traj.times, c_vals, nums, samples, dt,
                     tolerance, const, loose_prefactor,
                     tuple(rho_traj.warnings) + tuple(reg_warnings), rate_check)
