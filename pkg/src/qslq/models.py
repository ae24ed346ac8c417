"""Closed-form reference models.

Three qubit families serve both as user-facing presets and as analytic
oracles for the numerical pipeline:

- unitary evolution of A_0 = n.sigma under H = m.sigma,
- Markovian dephasing (H = sigma_x, jump sigma_z, constant small gamma,
  A_0 = sigma_y), with first-order-in-gamma closed forms,
- pure dephasing (H = 0) with the zero-temperature ohmic rate family, where
  off-diagonals decay by exp(-g(t)) and the quantumness bound saturates,
- the coherence-generation model (rho_0 = |0><0|, H = sigma_x, jump sigma_z)
  evolved in the Schrodinger picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as euler_gamma

from . import dynamics, opalg
from .opalg import SIGMA_X, SIGMA_Y, SIGMA_Z

UNIT_NORM_ATOL = 1e-12


def bloch_operator(a) -> np.ndarray:
    """a1 sigma_x + a2 sigma_y + a3 sigma_z."""
    a = np.asarray(a, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a[0] * SIGMA_X + a[1] * SIGMA_Y + a[2] * SIGMA_Z


def _unit(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > UNIT_NORM_ATOL:
        raise ValueError(f"{name} must be a unit vector, |{name}| = {np.linalg.norm(v)}")
    return v


# ---------------------------------------------------------------------------
# unitary qubit model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitaryQubitModel:
    """A_0 = n.sigma rotated by H = m.sigma; cos(theta) = m.n."""

    n_hat: tuple
    m_hat: tuple

    def __post_init__(self):
        n = _unit(self.n_hat, "n_hat")
        m = _unit(self.m_hat, "m_hat")
        object.__setattr__(self, "n_hat", tuple(float(x) for x in n))
        object.__setattr__(self, "m_hat", tuple(float(x) for x in m))

    @classmethod
    def from_angle(cls, theta: float) -> "UnitaryQubitModel":
        """m = x, n tilted by theta in the x-y plane."""
        return cls(n_hat=(math.cos(theta), math.sin(theta), 0.0), m_hat=(1.0, 0.0, 0.0))

    @property
    def theta(self) -> float:
        return math.acos(np.clip(np.dot(self.n_hat, self.m_hat), -1.0, 1.0))

    def initial_observable(self) -> np.ndarray:
        return bloch_operator(self.n_hat)

    def generator(self) -> dynamics.Generator:
        return dynamics.Generator(hamiltonian=bloch_operator(self.m_hat),
                                  jump=SIGMA_Z.copy(),
                                  schedule=dynamics.RateSchedule.constant(0.0),
                                  picture=dynamics.HEISENBERG)


@dataclass(frozen=True)
class UnitaryClosedForms:
    a_t: np.ndarray
    quantumness: float
    denom_norm: float


def unitary_closed_forms(model: UnitaryQubitModel, t: float) -> UnitaryClosedForms:
    """A_t, Q(A_0, A_t) and ||[A_0, L^dag(A_t)]||_HS in closed form.

    With T1 = H - (m.n) A_0 and T2 = (m.n)(n x m).sigma,

        Q(t)     = 8 (sin^2(2t) tr[T1^2] + 4 sin^4(t) tr[T2^2]),
        denom(t) = 4 sqrt(cos^2(2t) tr[T1^2] + sin^2(2t) tr[T2^2]),

    where tr[T1^2] = 2 sin^2(theta) and tr[T2^2] = 2 cos^2(theta) sin^2(theta).
    """
    n = np.asarray(model.n_hat)
    m = np.asarray(model.m_hat)
    mdotn = float(np.dot(m, n))
    mxn = np.cross(m, n)
    a_t = (
        math.cos(2 * t) * bloch_operator(n)
        - math.sin(2 * t) * bloch_operator(mxn)
        + 2.0 * mdotn * math.sin(t) ** 2 * bloch_operator(m)
    )
    tr_t1_sq = 2.0 * (1.0 - mdotn**2)
    tr_t2_sq = 2.0 * mdotn**2 * (1.0 - mdotn**2)
    q = 8.0 * (math.sin(2 * t) ** 2 * tr_t1_sq + 4.0 * math.sin(t) ** 4 * tr_t2_sq)
    denom = 4.0 * math.sqrt(math.cos(2 * t) ** 2 * tr_t1_sq + math.sin(2 * t) ** 2 * tr_t2_sq)
    return UnitaryClosedForms(a_t=a_t, quantumness=q, denom_norm=denom)


def unitary_t_q(model: UnitaryQubitModel, t_final: float) -> float:
    """Closed-form T_Q = sqrt(Q(T)) / (sqrt(2) <<denom>>_T)."""
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    num = math.sqrt(unitary_closed_forms(model, t_final).quantumness)
    integral, _ = quad(lambda u: unitary_closed_forms(model, u).denom_norm,
                       0.0, t_final, epsabs=1e-12, epsrel=1e-12, limit=200)
    if num == 0.0:
        return 0.0
    return num / (math.sqrt(2.0) * integral / t_final)


# ---------------------------------------------------------------------------
# Markovian dephasing (H = sigma_x, A_0 = sigma_y, constant gamma)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MarkovClosedForms:
    a_t: np.ndarray
    quantumness: float
    denom_norm: float


def markov_generator(gamma: float) -> dynamics.Generator:
    return dynamics.Generator(hamiltonian=SIGMA_X.copy(), jump=SIGMA_Z.copy(),
                              schedule=dynamics.RateSchedule.constant(gamma),
                              picture=dynamics.HEISENBERG)


def markov_initial_observable() -> np.ndarray:
    return SIGMA_Y.copy()


def markov_dephasing_closed_forms(gamma: float, t: float) -> MarkovClosedForms:
    """First-order-in-gamma forms for the underdamped regime gamma << 2:

        A_t   ~ e^{-gamma t/2} [(cos 2t - (gamma/4) sin 2t) sigma_y - sin 2t sigma_z]
        Q     ~ 16 e^{-gamma t} sin^2(2t)
        denom ~ 2 sqrt(2) e^{-gamma t/2} |2 cos 2t - (gamma/2) sin 2t|
    """
    if not 0.0 <= gamma < 2.0:
        raise ValueError(f"underdamped closed forms need 0 <= gamma < 2, got {gamma}")
    decay_half = math.exp(-0.5 * gamma * t)
    y = decay_half * (math.cos(2 * t) - 0.25 * gamma * math.sin(2 * t))
    z = -decay_half * math.sin(2 * t)
    a_t = y * SIGMA_Y + z * SIGMA_Z
    q = 16.0 * math.exp(-gamma * t) * math.sin(2 * t) ** 2
    denom = 2.0 * math.sqrt(2.0) * decay_half * abs(2.0 * math.cos(2 * t) - 0.5 * gamma * math.sin(2 * t))
    return MarkovClosedForms(a_t=a_t, quantumness=q, denom_norm=denom)


# ---------------------------------------------------------------------------
# pure dephasing with the ohmic rate family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PureDephasingModel:
    """A_0 = a.sigma under pure sigma_z dephasing with an ohmic schedule."""

    a: tuple
    schedule: dynamics.RateSchedule

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (3,):
            raise ValueError("Bloch components must be a 3-vector")
        if not self.schedule.time_dependent:
            raise ValueError("PureDephasingModel expects an ohmic RateSchedule")
        object.__setattr__(self, "a", tuple(float(x) for x in a))

    @classmethod
    def preset(cls, s: float, eta: float = 1.0, a=(1.0, 0.0, 1.0)) -> "PureDephasingModel":
        a = np.asarray(a, dtype=float)
        return cls(a=tuple(a / np.linalg.norm(a)), schedule=dynamics.RateSchedule.ohmic(s, eta))

    @property
    def degenerate(self) -> bool:
        """Zero quantumness for all t: needs a3 != 0 and a1^2 + a2^2 != 0."""
        a1, a2, a3 = self.a
        return a3 == 0.0 or (a1 == 0.0 and a2 == 0.0)

    @property
    def saturating_t_max(self) -> float:
        """gamma_t stays >= 0 up to tan(pi/s) for s > 2 (forever otherwise)."""
        if self.schedule.s > 2.0:
            return math.tan(math.pi / self.schedule.s)
        return math.inf

    def initial_observable(self) -> np.ndarray:
        return bloch_operator(self.a)

    def generator(self) -> dynamics.Generator:
        return dynamics.Generator(hamiltonian=np.zeros((2, 2), dtype=complex),
                                  jump=SIGMA_Z.copy(), schedule=self.schedule,
                                  picture=dynamics.HEISENBERG)


@dataclass(frozen=True)
class PureDephasingClosedForms:
    gamma_t: float
    g_t: float
    a_t: np.ndarray
    quantumness: float
    denom_norm: float


def pure_dephasing_closed_forms(model: PureDephasingModel, t: float) -> PureDephasingClosedForms:
    """Off-diagonals of A_t decay by e^{-g(t)};

        Q     = 16 e^{-2g} (e^g - 1)^2 a3^2 (a1^2 + a2^2)
        denom = 2 sqrt(2) e^{-g} |gamma_t| |a3| sqrt(a1^2 + a2^2).
    """
    a1, a2, a3 = model.a
    gamma_t = float(model.schedule.rate(t))
    g_t = model.schedule.dephasing_factor(t)
    decay = math.exp(-g_t)
    a_t = np.array([[a3, (a1 - 1j * a2) * decay],
                    [(a1 + 1j * a2) * decay, -a3]], dtype=complex)
    perp_sq = a1**2 + a2**2
    q = 16.0 * decay**2 * (math.exp(g_t) - 1.0) ** 2 * a3**2 * perp_sq
    denom = 2.0 * math.sqrt(2.0) * decay * abs(gamma_t) * abs(a3) * math.sqrt(perp_sq)
    return PureDephasingClosedForms(gamma_t=gamma_t, g_t=g_t, a_t=a_t,
                                    quantumness=q, denom_norm=denom)


def pure_dephasing_t_q(model: PureDephasingModel, t_final: float) -> float:
    """T_Q = (1 - e^{-g(T)}) / ((1/T) int_0^T |gamma_t| e^{-g(t)} dt).

    Equals T whenever gamma_t >= 0 on [0, T]; the a3 and in-plane factors
    cancel between numerator and denominator.
    """
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    sched = model.schedule

    def integrand(u):
        return abs(sched.rate(u)) * math.exp(-sched.dephasing_factor(u))

    integral, _ = quad(integrand, 0.0, t_final, epsabs=1e-12, epsrel=1e-12, limit=200)
    num = 1.0 - math.exp(-sched.dephasing_factor(t_final))
    if num == 0.0:
        return 0.0
    return num / (integral / t_final)


def dephasing_factor_closed_form(s: float, eta: float, t: float) -> float:
    """g(t) = eta [1 - cos((s-1) arctan t) / (1+t^2)^((s-1)/2)] Gamma(s-1).

    Valid for s > 1 where Gamma(s-1) is finite and positive; at s = 1 the
    limit is (eta/2) ln(1 + t^2).
    """
    if s < 1.0:
        raise ValueError("closed form implemented for s >= 1 only")
    if s == 1.0:
        return 0.5 * eta * math.log1p(t**2)
    return eta * (1.0 - math.cos((s - 1.0) * math.atan(t)) / (1.0 + t**2) ** ((s - 1.0) / 2.0)) \
        * euler_gamma(s - 1.0)


def dephasing_factor_from_spectral_density(s: float, eta: float, omega_c: float,
                                           t: float) -> float:
    """Zero-temperature dephasing factor from the ohmic-like spectrum

        J(w) = eta w^s / w_c^(s-1) e^(-w/w_c),
        g(t) = int_0^inf dw J(w) (1 - cos(wt)) / w^2.
    """
    if s <= 0:
        raise ValueError("spectral integral diverges for s <= 0")
    if omega_c <= 0:
        raise ValueError("cutoff frequency must be positive")
    if t == 0.0:
        return 0.0

    def integrand(u):
        # u = w / w_c
        return u ** (s - 2.0) * math.exp(-u) * (1.0 - math.cos(u * omega_c * t))

    val, _ = quad(integrand, 0.0, np.inf, epsabs=1e-10, epsrel=1e-10, limit=400)
    return eta * omega_c * val


# ---------------------------------------------------------------------------
# coherence generation (rho_0 = |0><0|, H = sigma_x, sigma_z basis)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoherenceGenerationClosedForms:
    c_l1: float
    rate_integrand_sq: float


def coherence_generation_generator(gamma: float) -> dynamics.Generator:
    return dynamics.Generator(hamiltonian=SIGMA_X.copy(), jump=SIGMA_Z.copy(),
                              schedule=dynamics.RateSchedule.constant(gamma),
                              picture=dynamics.SCHRODINGER)


def coherence_generation_initial_state() -> np.ndarray:
    return np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


def coherence_generation_closed_forms(gamma: float, t: float) -> CoherenceGenerationClosedForms:
    """First-order l1-coherence forms for the coherence-generation example:

        C_l1(t) ~ e^{-gamma t/2} |sin 2t|,
        [dC_l1/dt]^2 / (2 C_l1)
                ~ 2 e^{-gamma t/2} (1/2 + cos(4t)/2 - (gamma/4) sin(4t)) / |sin 2t|.

    The second quantity is the square of the saturated-rate expression built
    from C_l1; it is reported alongside the skew-information pipeline, which
    the coherence bound itself is checked against.
    """
    if not 0.0 <= gamma < 2.0:
        raise ValueError(f"underdamped closed forms need 0 <= gamma < 2, got {gamma}")
    decay_half = math.exp(-0.5 * gamma * t)
    c_l1 = decay_half * abs(math.sin(2 * t))
    s2 = abs(math.sin(2 * t))
    if s2 == 0.0:
        rate_sq = math.inf
    else:
        rate_sq = 2.0 * decay_half * (0.5 + 0.5 * math.cos(4 * t) - 0.25 * gamma * math.sin(4 * t)) / s2
    return CoherenceGenerationClosedForms(c_l1=c_l1, rate_integrand_sq=rate_sq)
