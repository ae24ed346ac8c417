"""Liouvillian generators for the dephasing family and time propagation.

States evolve in the Schrodinger picture by

    d(rho)/dt = -i [H, rho] + (gamma_t / 2) (J rho J - (J^2 rho + rho J^2)/2)

and observables in the Heisenberg picture by the adjoint generator

    d(A)/dt = +i [H, A] + (gamma_t / 2) (J A J - (J^2 A + A J^2)/2),

with a Hermitian jump operator J (sigma_z by default, where the dissipator
reduces to (gamma/2)(J A J - A)).  Propagation happens in the vectorized
(column-stacking) representation, where the generator is a d^2 x d^2 matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as euler_gamma

from . import opalg

SCHRODINGER = "schrodinger"
HEISENBERG = "heisenberg"

DEPHASING_QUAD_ATOL = 1e-12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class RateSchedule:
    """Dephasing rate gamma_t: either constant or the zero-temperature ohmic
    family gamma_t = eta (1+t^2)^(-s/2) Gamma(s) sin(s arctan t)."""

    kind: str
    gamma: float = 0.0
    s: float = 0.0
    eta: float = 0.0

    @classmethod
    def constant(cls, gamma: float) -> "RateSchedule":
        if gamma < 0:
            raise ValueError(f"constant rate must be >= 0, got {gamma}")
        return cls(kind="constant", gamma=float(gamma))

    @classmethod
    def ohmic(cls, s: float, eta: float) -> "RateSchedule":
        if s <= 0 or eta <= 0:
            raise ValueError(f"ohmic family needs s > 0 and eta > 0, got s={s}, eta={eta}")
        return cls(kind="ohmic", s=float(s), eta=float(eta))

    @property
    def time_dependent(self) -> bool:
        return self.kind == "ohmic"

    def rate(self, t):
        """gamma_t, vectorized over t."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = np.full_like(t, self.gamma)
        else:
            out = (
                self.eta
                * (1.0 + t**2) ** (-self.s / 2.0)
                * euler_gamma(self.s)
                * np.sin(self.s * np.arctan(t))
            )
        return out if out.ndim else float(out)

    def dephasing_factor(self, t: float) -> float:
        """g(t) = integral of gamma_t' from 0 to t (adaptive quadrature)."""
        if self.kind == "constant":
            return self.gamma * t
        if t == 0.0:
            return 0.0
        val, _ = quad(self.rate, 0.0, t, epsabs=DEPHASING_QUAD_ATOL,
                      epsrel=DEPHASING_QUAD_ATOL, limit=200)
        return val

    def dephasing_profile(self, times: np.ndarray) -> np.ndarray:
        """g evaluated on a whole grid via per-interval Gauss-Legendre panels.

        The grid intervals are short and gamma_t is smooth, so the fixed
        16-point rule is far below the 1e-10 quadrature budget (cross-checked
        against dephasing_factor in the tests).
        """
        times = np.asarray(times, dtype=float)
        if self.kind == "constant":
            return self.gamma * times
        starts, ends = times[:-1], times[1:]
        half = 0.5 * (ends - starts)
        mid = 0.5 * (ends + starts)
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        increments = half * (np.asarray(self.rate(pts)) @ _GL_WEIGHTS)
        g0 = self.dephasing_factor(float(times[0]))
        return g0 + np.concatenate([[0.0], np.cumsum(increments)])


@dataclass(frozen=True)
class TimeGrid:
    """Uniform discretization of [0, t_max] with `steps` panels (steps+1 nodes)."""

    t_max: float
    steps: int

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"steps must be an integer >= 2, got {self.steps}")

    @property
    def dt(self) -> float:
        return self.t_max / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps + 1)


@dataclass(frozen=True)
class Generator:
    """Liouvillian specification: Hamiltonian + single Hermitian jump +
    rate schedule, in either picture."""

    hamiltonian: np.ndarray
    jump: np.ndarray
    schedule: RateSchedule
    picture: str

    def __post_init__(self):
        h = opalg.assert_hermitian(self.hamiltonian)
        j = opalg.assert_hermitian(self.jump)
        if h.shape != j.shape:
            raise opalg.OperatorError("Hamiltonian and jump dimensions differ")
        if self.picture not in (SCHRODINGER, HEISENBERG):
            raise ValueError(f"unknown picture {self.picture!r}")
        h = h.copy()
        j = j.copy()
        h.setflags(write=False)
        j.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jump", j)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def apply_generator(gen: Generator, x, t: float) -> np.ndarray:
    """L_t(x) in the generator's picture, with the rate evaluated at time t."""
    xm = opalg.as_square_matrix(x)
    if xm.shape[0] != gen.dim:
        raise opalg.OperatorError(
            f"operator dimension {xm.shape[0]} does not match generator dim {gen.dim}"
        )
    h, j = gen.hamiltonian, gen.jump
    sign = 1.0j if gen.picture == HEISENBERG else -1.0j
    out = sign * (h @ xm - xm @ h)
    gamma = float(gen.schedule.rate(t))
    if gamma != 0.0:
        jsq = j @ j
        out = out + 0.5 * gamma * (j @ xm @ j - 0.5 * (jsq @ xm + xm @ jsq))
    return out


def _hamiltonian_superoperator(gen: Generator) -> np.ndarray:
    h = gen.hamiltonian
    eye = np.eye(gen.dim, dtype=complex)
    sign = 1.0j if gen.picture == HEISENBERG else -1.0j
    return sign * (np.kron(eye, h) - np.kron(h.T, eye))


def _dissipator_superoperator(gen: Generator) -> np.ndarray:
    """Unit-rate dissipator matrix; multiply by gamma_t for the full part."""
    j = gen.jump
    jsq = j @ j
    eye = np.eye(gen.dim, dtype=complex)
    return 0.5 * (np.kron(j.T, j) - 0.5 * (np.kron(eye, jsq) + np.kron(jsq.T, eye)))


def build_superoperator(gen: Generator, t: float) -> np.ndarray:
    """M such that vectorize(apply_generator(gen, x, t)) = M @ vectorize(x)."""
    return _hamiltonian_superoperator(gen) + float(gen.schedule.rate(t)) * _dissipator_superoperator(gen)


def adjoint_superoperator(m) -> np.ndarray:
    """Adjoint with respect to the Hilbert-Schmidt inner product.

    In the vectorized basis this is the conjugate transpose, and it realizes
    the pairing tr(A L(rho)) = tr(L^dag(A) rho).
    """
    return opalg.as_square_matrix(m).conj().T


STEP_TOO_COARSE = "step_too_coarse"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    picture: str
    warnings: tuple = field(default_factory=tuple)

    def __len__(self) -> int:
        return self.states.shape[0]


def propagate(gen: Generator, x0, grid: TimeGrid) -> Trajectory:
    """Propagate x0 on the grid under the generator.

    Constant schedules reuse a single matrix exponential of dt*M.  For
    time-dependent schedules the generator family {M(t)} is checked for
    commutativity; if it commutes (pure dephasing does) the exact propagator
    exp(dt*M_H + delta_g*M_D) is used per step, otherwise fixed-step RK4 on
    the vectorized ODE.
    """
    x0m = opalg.as_square_matrix(x0)
    if x0m.shape[0] != gen.dim:
        raise opalg.OperatorError("initial operator dimension does not match generator")
    times = grid.times
    dt = grid.dt
    n = times.size
    states = np.empty((n, gen.dim, gen.dim), dtype=complex)
    states[0] = x0m
    v = opalg.vectorize(x0m)

    m_ham = _hamiltonian_superoperator(gen)
    m_diss = _dissipator_superoperator(gen)
    warnings = []

    if not gen.schedule.time_dependent:
        m_full = m_ham + gen.schedule.gamma * m_diss
        if dt * np.linalg.norm(m_full, 2) > 1.0:
            warnings.append(STEP_TOO_COARSE)
        step = opalg.expm(dt * m_full)
        for k in range(1, n):
            v = step @ v
            states[k] = opalg.devectorize(v)
        return Trajectory(times, states, gen.picture, tuple(warnings))

    rates = np.asarray(gen.schedule.rate(times))
    max_norm = np.linalg.norm(m_ham, 2) + float(np.max(np.abs(rates))) * np.linalg.norm(m_diss, 2)
    if dt * max_norm > 1.0:
        warnings.append(STEP_TOO_COARSE)

    comm_scale = 1.0 + opalg.hs_norm(m_ham) * opalg.hs_norm(m_diss)
    commuting = opalg.hs_norm(opalg.commutator(m_ham, m_diss)) <= 1e-12 * comm_scale

    if commuting:
        g_nodes = gen.schedule.dephasing_profile(times)
        step_ham = opalg.expm(dt * m_ham)
        w_d, v_d = np.linalg.eigh(m_diss)
        v_d_h = v_d.conj().T
        for k in range(1, n):
            dg = g_nodes[k] - g_nodes[k - 1]
            step = step_ham @ ((v_d * np.exp(dg * w_d)) @ v_d_h)
            v = step @ v
            states[k] = opalg.devectorize(v)
        return Trajectory(times, states, gen.picture, tuple(warnings))

    def m_at(t):
        return m_ham + float(gen.schedule.rate(t)) * m_diss

    for k in range(1, n):
        t0 = times[k - 1]
        m1 = m_at(t0)
        m2 = m_at(t0 + 0.5 * dt)
        m3 = m_at(t0 + dt)
        k1 = m1 @ v
        k2 = m2 @ (v + 0.5 * dt * k1)
        k3 = m2 @ (v + 0.5 * dt * k2)
        k4 = m3 @ (v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k] = opalg.devectorize(v)
    return Trajectory(times, states, gen.picture, tuple(warnings))
