"""Levy surplus models with finite-activity two-sided jumps.

A model is the triplet (gamma, sigma, jumps): the drift coefficient written
in the compensated form (small jumps |x| < 1 are compensated), the Gaussian
coefficient, and an optional compound-Poisson jump specification whose
one-sided magnitude laws are exponential, finite exponential mixtures, or
point masses.  The effective linear drift of a sample path is therefore
gamma minus the small-jump mean; see linear_drift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Exponential",
    "ExpMixture",
    "PointMass",
    "JumpSpec",
    "LevyModel",
    "ProblemParams",
    "Variation",
    "validate_model",
    "classify_variation",
    "char_exponent",
    "laplace_exponent",
    "mean_rate",
    "linear_drift",
    "mirror",
]

_WTOL = 1e-12  # mixture weights must sum to 1 within this


@dataclass(frozen=True)
class Exponential:
    """Exponential magnitude law with rate eta (mean 1/eta)."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValueError("exponential rate must be positive")

    def mean(self) -> float:
        return 1.0 / self.rate

    def mean_below_one(self) -> float:
        # E[J 1{J<1}] = (1 - e^{-eta}(1+eta)) / eta
        eta = self.rate
        return (1.0 - math.exp(-eta) * (1.0 + eta)) / eta

    def laplace(self, s):
        return self.rate / (self.rate + s)

    def laplace_deriv(self, s):
        return -self.rate / (self.rate + s) ** 2

    def char(self, t):
        return self.rate / (self.rate - 1j * np.asarray(t))

    def pdf(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u >= 0.0, self.rate * np.exp(-self.rate * u), 0.0)

    def survival(self, u):
        return np.exp(-self.rate * np.maximum(np.asarray(u, dtype=float), 0.0))

    # number of uniforms consumed per sampled magnitude
    draws_per_jump = 1

    def sample_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        return -np.log1p(-u[:, 0]) / self.rate


@dataclass(frozen=True)
class ExpMixture:
    """Finite mixture of exponentials: weights w_i, rates eta_i."""

    weights: tuple
    rates: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if w.ndim != 1 or w.shape != r.shape or w.size == 0:
            raise ValueError("weights and rates must be matching nonempty sequences")
        if np.any(w < 0.0) or abs(w.sum() - 1.0) > _WTOL:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        if np.any(r <= 0.0):
            raise ValueError("mixture rates must be positive")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "rates", tuple(float(x) for x in r))

    def _wr(self):
        return np.asarray(self.weights), np.asarray(self.rates)

    def mean(self) -> float:
        w, r = self._wr()
        return float(np.sum(w / r))

    def mean_below_one(self) -> float:
        w, r = self._wr()
        return float(np.sum(w * (1.0 - np.exp(-r) * (1.0 + r)) / r))

    def laplace(self, s):
        w, r = self._wr()
        s = np.asarray(s, dtype=np.result_type(np.asarray(s), 1.0))
        if s.ndim:
            return np.sum(w * r / (r + s[..., None]), axis=-1)
        return np.sum(w * r / (r + s)).item()

    def laplace_deriv(self, s):
        w, r = self._wr()
        s = np.asarray(s, dtype=np.result_type(np.asarray(s), 1.0))
        if s.ndim:
            return np.sum(-w * r / (r + s[..., None]) ** 2, axis=-1)
        return np.sum(-w * r / (r + s) ** 2).item()

    def char(self, t):
        w, r = self._wr()
        t = np.asarray(t)
        if t.ndim:
            return np.sum(w * r / (r - 1j * t[..., None]), axis=-1)
        return complex(np.sum(w * r / (r - 1j * t)))

    def pdf(self, u):
        w, r = self._wr()
        u = np.asarray(u, dtype=float)
        out = np.sum(w * r * np.exp(-r * u[..., None]), axis=-1)
        return np.where(u >= 0.0, out, 0.0)

    def survival(self, u):
        w, r = self._wr()
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        return np.sum(w * np.exp(-r * u[..., None]), axis=-1)

    draws_per_jump = 2

    def sample_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        w, r = self._wr()
        cum = np.cumsum(w)
        idx = np.searchsorted(cum, u[:, 0], side="right")
        idx = np.minimum(idx, len(r) - 1)
        return -np.log1p(-u[:, 1]) / r[idx]


@dataclass(frozen=True)
class PointMass:
    """Degenerate magnitude law: every jump has size `size` > 0."""

    size: float

    def __post_init__(self):
        if not self.size > 0.0:
            raise ValueError("point mass size must be positive")

    def mean(self) -> float:
        return self.size

    def mean_below_one(self) -> float:
        # boundary |x| = 1 belongs to the large-jump part
        return self.size if self.size < 1.0 else 0.0

    def laplace(self, s):
        return np.exp(-np.asarray(s) * self.size)

    def laplace_deriv(self, s):
        return -self.size * np.exp(-np.asarray(s) * self.size)

    def char(self, t):
        return np.exp(1j * np.asarray(t) * self.size)

    draws_per_jump = 1

    def sample_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        return np.full(u.shape[0], self.size)


@dataclass(frozen=True)
class JumpSpec:
    """Compound-Poisson jumps: total arrival rate, probability a jump is
    positive, and one magnitude law per sign (negative jumps store the law
    of the absolute size)."""

    rate: float
    prob_positive: float
    positive: object | None = None
    negative: object | None = None

    def __post_init__(self):
        if self.rate < 0.0:
            raise ValueError("jump arrival rate must be nonnegative")
        if not 0.0 <= self.prob_positive <= 1.0:
            raise ValueError("prob_positive must lie in [0, 1]")
        if self.rate > 0.0:
            if self.prob_positive > 0.0 and self.positive is None:
                raise ValueError("positive magnitude law required")
            if self.prob_positive < 1.0 and self.negative is None:
                raise ValueError("negative magnitude law required")

    @property
    def rate_pos(self) -> float:
        return self.rate * self.prob_positive

    @property
    def rate_neg(self) -> float:
        return self.rate * (1.0 - self.prob_positive)


@dataclass(frozen=True)
class LevyModel:
    gamma: float
    sigma: float
    jumps: JumpSpec | None = None

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")

    @property
    def rate_pos(self) -> float:
        j = self.jumps
        return 0.0 if j is None else j.rate_pos

    @property
    def rate_neg(self) -> float:
        j = self.jumps
        return 0.0 if j is None else j.rate_neg


@dataclass(frozen=True)
class ProblemParams:
    """Discount rate q > 0 and proportional injection cost beta > 1."""

    discount: float
    injection_cost: float

    def __post_init__(self):
        if not self.discount > 0.0:
            raise ValueError("discount rate must be positive")
        if not self.injection_cost > 1.0:
            raise ValueError("injection cost must exceed 1")


@dataclass(frozen=True)
class Variation:
    bounded: bool
    delta: float | None  # effective linear drift when bounded, else None


def _small_jump_mean(model: LevyModel) -> float:
    # int_{|x|<1} x Pi(dx); open interval, so a point mass at exactly 1 is large
    j = model.jumps
    if j is None:
        return 0.0
    out = 0.0
    if j.rate_pos > 0.0:
        out += j.rate_pos * j.positive.mean_below_one()
    if j.rate_neg > 0.0:
        out -= j.rate_neg * j.negative.mean_below_one()
    return out


def linear_drift(model: LevyModel) -> float:
    """Continuous drift rate of sample paths: gamma - int_{|x|<1} x Pi(dx)."""
    return model.gamma - _small_jump_mean(model)


def classify_variation(model: LevyModel) -> Variation:
    if model.sigma > 0.0:
        return Variation(bounded=False, delta=None)
    return Variation(bounded=True, delta=linear_drift(model))


def validate_model(model: LevyModel) -> None:
    """Reject models with monotone paths (no control problem to solve)."""
    var = classify_variation(model)
    if not var.bounded:
        return
    up = model.rate_pos > 0.0
    down = model.rate_neg > 0.0
    d = var.delta
    if not down and d >= 0.0:
        raise ValueError("monotone paths: nondecreasing surplus")
    if not up and d <= 0.0:
        raise ValueError("monotone paths: nonincreasing surplus")


def char_exponent(model: LevyModel, lam):
    """Characteristic exponent: E e^{i lam X_1} = e^{-Psi(lam)}."""
    lam = np.asarray(lam, dtype=np.result_type(np.asarray(lam), 1.0))
    j = model.jumps
    psi = -1j * model.gamma * lam + 0.5 * model.sigma**2 * lam**2
    if j is not None:
        if j.rate_pos > 0.0:
            psi = psi + j.rate_pos * (1.0 - j.positive.char(lam))
        if j.rate_neg > 0.0:
            psi = psi + j.rate_neg * (1.0 - j.negative.char(-lam))
    psi = psi + 1j * lam * _small_jump_mean(model)
    return psi


def laplace_exponent(model: LevyModel, lam):
    """Laplace exponent psi(lam) = log E e^{lam X_1} for lam >= 0.

    Defined only for models with no positive jumps (the positive tail would
    not be exponentially integrable at all lam)."""
    if model.rate_pos > 0.0:
        raise ValueError("laplace exponent requires no positive jumps")
    lam = np.asarray(lam, dtype=np.result_type(np.asarray(lam), 1.0))
    j = model.jumps
    out = model.gamma * lam + 0.5 * model.sigma**2 * lam**2
    if j is not None and j.rate_neg > 0.0:
        mb1 = j.negative.mean_below_one()
        out = out + j.rate_neg * (j.negative.laplace(lam) - 1.0 + lam * mb1)
    return out


def laplace_exponent_deriv(model: LevyModel, lam):
    if model.rate_pos > 0.0:
        raise ValueError("laplace exponent requires no positive jumps")
    lam = np.asarray(lam, dtype=float)
    j = model.jumps
    out = model.gamma + model.sigma**2 * lam
    if j is not None and j.rate_neg > 0.0:
        mb1 = j.negative.mean_below_one()
        out = out + j.rate_neg * (j.negative.laplace_deriv(lam) + mb1)
    return out


def mean_rate(model: LevyModel) -> float:
    """E X_1 = gamma + int_{|x|>=1} x Pi(dx), in closed form."""
    j = model.jumps
    out = model.gamma
    if j is not None:
        if j.rate_pos > 0.0:
            p = j.positive
            out += j.rate_pos * (p.mean() - p.mean_below_one())
        if j.rate_neg > 0.0:
            n = j.negative
            out -= j.rate_neg * (n.mean() - n.mean_below_one())
    return out


def mirror(model: LevyModel) -> LevyModel:
    """The sign-flipped model (law of -X)."""
    j = model.jumps
    jm = None
    if j is not None:
        jm = JumpSpec(
            rate=j.rate,
            prob_positive=1.0 - j.prob_positive,
            positive=j.negative,
            negative=j.positive,
        )
    return LevyModel(gamma=-model.gamma, sigma=model.sigma, jumps=jm)
