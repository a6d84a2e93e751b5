"""Free-energy densities: logarithmic, scaled quartic, and Taylor polynomials of the logarithm.

Physical constants (molecular density times Boltzmann constant) are set to 1,
so the logarithmic density reads

    f(u) = Tc (1 - u^2)/2 + T [ (1+u)/2 ln((1+u)/2) + (1-u)/2 ln((1-u)/2) ]

and its 2n-th order Taylor polynomial is

    f_2n(u) = Tc (1 - u^2)/2 + T [ -ln 2 + sum_{p=1..n} u^(2p) / (2p (2p-1)) ] + K_2n

with ``K_2n`` chosen so that ``f_2n`` vanishes at its own binodal points.
The scaled quartic is f(u) = (1 - u^2)^2 / 4, psi(u) = u^3 - u.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq
from scipy.special import xlogy

from .errors import DomainError, NumericError, ParameterError

LOG_GUARD = 1e-9
KINDS = ("logarithmic", "scaled_quartic", "taylor")


@dataclass(frozen=True)
class EnergyModel:
    kind: str
    T: float = 1.0
    Tc: float = 2.0
    n: int = 0
    K: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "taylor" and self.n < 2:
            raise ParameterError("taylor models need n >= 2")

    @property
    def admissible_interval(self) -> tuple[float, float]:
        if self.kind == "logarithmic":
            return (-1.0, 1.0)
        return (-np.inf, np.inf)

    @property
    def name(self) -> str:
        if self.kind == "taylor":
            return f"taylor{2 * self.n}"
        return self.kind

    def check_admissible(self, u, where: str = "") -> None:
        if self.kind != "logarithmic":
            return
        bad = np.abs(np.asarray(u)) >= 1.0 - LOG_GUARD
        if np.any(bad):
            raise DomainError(f"logarithmic model evaluated at |u| >= 1 - {LOG_GUARD:g}{where}")

    def f(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "scaled_quartic":
            return 0.25 * (1.0 - u * u) ** 2
        if self.kind == "logarithmic":
            self.check_admissible(u)
            a, b = 0.5 * (1.0 + u), 0.5 * (1.0 - u)
            return 0.5 * self.Tc * (1.0 - u * u) + self.T * (xlogy(a, a) + xlogy(b, b))
        u2 = u * u
        series = np.zeros_like(u2)
        for p in range(self.n, 0, -1):
            series = (series + 1.0 / (2 * p * (2 * p - 1))) * u2
        return 0.5 * self.Tc * (1.0 - u2) + self.T * (series - np.log(2.0)) + self.K

    def psi(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "scaled_quartic":
            return u ** 3 - u
        if self.kind == "logarithmic":
            self.check_admissible(u)
            return -self.Tc * u + self.T * np.arctanh(u)
        u2 = u * u
        series = np.zeros_like(u2)
        for p in range(self.n, 0, -1):
            series = series * u2 + 1.0 / (2 * p - 1)
        return -self.Tc * u + self.T * u * series

    def dpsi(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "scaled_quartic":
            return 3.0 * u * u - 1.0
        if self.kind == "logarithmic":
            self.check_admissible(u)
            return -self.Tc + self.T / (1.0 - u * u)
        u2 = u * u
        series = np.zeros_like(u2)
        for _ in range(self.n):
            series = series * u2 + 1.0
        return -self.Tc + self.T * series

    @property
    def lipschitz_concave(self) -> float:
        """sup of -psi'(u): bounds the non-convex part of f."""
        return 1.0 if self.kind == "scaled_quartic" else max(self.Tc - self.T, 0.0)


def eval_f(model: EnergyModel, u):
    return model.f(u)


def eval_psi(model: EnergyModel, u):
    return model.psi(u)


def eval_dpsi(model: EnergyModel, u):
    return model.dpsi(u)


def _check_temperatures(T, Tc):
    if not (T > 0 and Tc > 0):
        raise ParameterError(f"temperatures must be positive, got T={T}, Tc={Tc}")
    if not T < Tc:
        raise ParameterError(f"need T < Tc for a double well, got T={T}, Tc={Tc}")


def logarithmic_model(T: float = 1.0, Tc: float = 2.0) -> EnergyModel:
    if not (T > 0 and Tc > 0):
        raise ParameterError(f"temperatures must be positive, got T={T}, Tc={Tc}")
    return EnergyModel("logarithmic", T=float(T), Tc=float(Tc))


def scaled_quartic_model() -> EnergyModel:
    return EnergyModel("scaled_quartic", T=1.0, Tc=2.0)


def taylor_model(n: int, T: float = 1.0, Tc: float = 2.0) -> EnergyModel:
    """Taylor polynomial of degree 2n of the logarithmic density, normalized at its binodal."""
    if int(n) != n or n < 2:
        raise ParameterError(f"n must be an integer >= 2, got {n!r}")
    _check_temperatures(T, Tc)
    raw = EnergyModel("taylor", T=float(T), Tc=float(Tc), n=int(n), K=0.0)
    beta = critical_points(raw).binodal[1]
    return replace(raw, K=-float(raw.f(beta)))


def quartic_model(T: float = 1.0, Tc: float = 2.0) -> EnergyModel:
    """The physical quartic f_4 (Taylor order 4)."""
    return taylor_model(2, T, Tc)


@dataclass(frozen=True)
class CriticalPoints:
    spinodal: tuple[float, float]
    binodal: tuple[float, float]


def _root(fun, dfun, lo, hi, xtol=1e-14):
    try:
        x = brentq(fun, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    except (ValueError, RuntimeError) as exc:
        raise NumericError(f"root bracketing failed on [{lo}, {hi}]: {exc}") from exc
    for _ in range(2):
        d = dfun(x)
        if d != 0:
            step = fun(x) / d
            if abs(step) < 1e-10:
                x -= step
    return float(x)


def critical_points(model: EnergyModel) -> CriticalPoints:
    """Spinodal (roots of f'') and binodal (minima of the symmetric well) points."""
    if model.kind != "scaled_quartic":
        _check_temperatures(model.T, model.Tc)
    psi = lambda x: float(model.psi(x))  # noqa: E731
    dpsi = lambda x: float(model.dpsi(x))  # noqa: E731
    d2 = lambda x, h=1e-6: (dpsi(x + h) - dpsi(x - h)) / (2 * h)  # noqa: E731
    if model.kind == "logarithmic":
        upper = 1.0 - 2 * LOG_GUARD
    else:
        upper = 2.0
        while dpsi(upper) <= 0 or psi(upper) <= 0:
            upper *= 2.0
            if upper > 1e6:
                raise NumericError("could not bracket the critical points")
    sigma = _root(dpsi, d2, 0.0, upper)
    beta = _root(psi, dpsi, sigma, upper)
    return CriticalPoints((-sigma, sigma), (-beta, beta))


def tanh_profile(T: float, Tc: float, eps: float):
    """Closed-form stationary front of the quartic f_4 on the real line.

    Returns ``(u_plus, mu, profile)`` with ``profile(x) = u_plus * tanh(mu * x)``.
    """
    _check_temperatures(T, Tc)
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    u_plus = float(np.sqrt(3.0 * (Tc / T - 1.0)))
    mu = float(np.sqrt(Tc - T) / (eps * np.sqrt(2.0)))

    def profile(x):
        return u_plus * np.tanh(mu * np.asarray(x, dtype=float))

    return u_plus, mu, profile


def interface_length(T: float, Tc: float, eps: float) -> float:
    """Front width 2 u_+ / slope(0) = 2 eps sqrt(2) / sqrt(Tc - T)."""
    u_plus, mu, _ = tanh_profile(T, Tc, eps)
    return 2.0 * u_plus / (u_plus * mu)


def lambda_param(Tc: float, eps: float) -> float:
    if not (Tc > 0 and eps > 0):
        raise ParameterError("Tc and eps must be positive")
    return 2.0 * eps * np.sqrt(2.0) / np.sqrt(Tc)
