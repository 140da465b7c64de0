"""Pointwise degenerate operator |p|^(h-3) <M p, p> and its uniformly
parabolic regularization eps*I + (|p|^2 + delta^2)^((h-3)/2) p (x) p.

The operator is h-homogeneous in the solution amplitude and singular at
p = 0 for h < 3; the singularity is removable because the overall growth
is |p|^(h-1), so the continuous extension takes the value 0 there.

Everything in this module is pure and operates on plain numpy arrays;
batched inputs (leading axes on M and p) are supported throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Below this gradient magnitude the degenerate term is short-circuited to 0,
# backed by the bound |F(M,p)| <= ||M|| |p|^(h-1).
TINY_GRADIENT = 1e-300


@dataclass(frozen=True)
class Homogeneity:
    """Validated homogeneity degree h > 1 with the derived constants.

    alpha = (h-1)/(h+1) and kappa = (2*alpha)^(1/(h+1)) parametrize the
    separable radial profile; c_h and d_h are the amplitude constants of
    the self-similar and traveling-wave families:

        c_h = (1/2)^(1/(h-1)) * ((h-1)/(h+1))^(h/(h-1))
        d_h = (h-1)^(h/(h-1)) / h

    rbar (the half-period of the periodic radial profile) is expensive to
    produce, so it is computed lazily on first access and cached.
    """

    h: float
    alpha: float = field(init=False)
    kappa: float = field(init=False)
    c_h: float = field(init=False)
    d_h: float = field(init=False)

    def __post_init__(self):
        h = float(self.h)
        if not math.isfinite(h) or h <= 1.0:
            raise ValueError(f"homogeneity degree must satisfy h > 1, got {self.h}")
        object.__setattr__(self, "h", h)
        alpha = (h - 1.0) / (h + 1.0)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "kappa", (2.0 * alpha) ** (1.0 / (h + 1.0)))
        object.__setattr__(
            self, "c_h", 0.5 ** (1.0 / (h - 1.0)) * alpha ** (h / (h - 1.0))
        )
        object.__setattr__(self, "d_h", (h - 1.0) ** (h / (h - 1.0)) / h)
        object.__setattr__(self, "_rbar", None)

    @property
    def rbar(self) -> float:
        """Half-period of the periodic radial profile, kappa * int_0^pi sin^alpha."""
        if self._rbar is None:
            from .exact import giant_half_period

            object.__setattr__(self, "_rbar", giant_half_period(self))
        return self._rbar


def _check_matrix(M: np.ndarray, d: int) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape[-2:] != (d, d):
        raise ValueError(f"matrix block must be ({d},{d}), got {M.shape}")
    if np.isnan(M).any():
        raise ValueError("NaN entries in matrix argument")
    if not (M == np.swapaxes(M, -1, -2)).all():
        raise ValueError("matrix argument must be exactly symmetric")
    return M


def _check_gradient(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if not np.isfinite(p).all():
        raise ValueError("gradient argument must be finite")
    return p


def eval_operator(M, p, h: Homogeneity):
    """Continuous extension of |p|^(h-3) <M p, p>, with value 0 at p = 0.

    Computed as |p|^(h-1) <M q, q> with q = p/|p|, which is the same number
    but never forms the unbounded factor |p|^(h-3) (for h < 3 that factor
    overflows long before the product does).  Accepts batched M of shape
    (..., d, d) and p of shape (..., d).
    """
    p = _check_gradient(p)
    d = p.shape[-1]
    M = _check_matrix(M, d)
    norm = np.sqrt(np.einsum("...i,...i->...", p, p))
    scalar = norm.ndim == 0
    norm_safe = np.where(norm > TINY_GRADIENT, norm, 1.0)
    q = p / norm_safe[..., None]
    quad = np.einsum("...ij,...i,...j->...", M, q, q)
    out = np.where(norm > TINY_GRADIENT, norm_safe ** (h.h - 1.0) * quad, 0.0)
    return float(out) if scalar else out


def regularized_matrix(p, eps: float, delta: float, h: Homogeneity):
    """Diffusion matrix eps*I + (|p|^2 + delta^2)^((h-3)/2) p (x) p.

    delta = 0 is rejected for h < 3: the scalar coefficient is unbounded
    near p = 0 exactly in that range.  The result is symmetric positive
    semidefinite, and positive definite for eps > 0.
    """
    _check_regularization(eps, delta, h)
    p = _check_gradient(p)
    d = p.shape[-1]
    coeff = _degenerate_coefficient(p, delta, h)
    outer = np.einsum("...i,...j->...ij", p, p)
    return eps * np.eye(d) + coeff[..., None, None] * outer


def eval_regularized(M, p, eps: float, delta: float, h: Homogeneity):
    """Contraction A(p) : M = eps*tr(M) + (|p|^2+delta^2)^((h-3)/2) <M p, p>.

    Converges to eval_operator(M, p, h) as (eps, delta) -> 0 for p != 0.
    """
    _check_regularization(eps, delta, h)
    p = _check_gradient(p)
    d = p.shape[-1]
    M = _check_matrix(M, d)
    coeff = _degenerate_coefficient(p, delta, h)
    trace = np.einsum("...ii->...", M)
    quad = np.einsum("...ij,...i,...j->...", M, p, p)
    out = eps * trace + coeff * quad
    return float(out) if out.ndim == 0 else out


def _check_regularization(eps: float, delta: float, h: Homogeneity) -> None:
    if eps < 0.0:
        raise ValueError("eps must be >= 0")
    if delta < 0.0:
        raise ValueError("delta must be >= 0")
    if delta == 0.0 and h.h < 3.0:
        raise ValueError("delta = 0 is only allowed for h >= 3 (coefficient unbounded otherwise)")


def _degenerate_coefficient(p: np.ndarray, delta: float, h: Homogeneity) -> np.ndarray:
    """(|p|^2 + delta^2)^((h-3)/2) with the h = 3, delta = 0 convention 0^0 = 1."""
    s = np.einsum("...i,...i->...", p, p) + delta * delta
    expo = 0.5 * (h.h - 3.0)
    if expo == 0.0:
        return np.ones_like(np.asarray(s, dtype=float))
    if expo > 0.0:
        return np.asarray(s, dtype=float) ** expo
    # expo < 0 requires delta > 0 (checked upstream), so s >= delta^2 > 0
    return np.asarray(s, dtype=float) ** expo


@dataclass(frozen=True)
class Source:
    """Zero-order term H(u), restricted to linear growth |H(u)| <= bound*|u|.

    Kinds: "zero", "linear" (H = a*u), "bounded_slope" (H = a*sin(u)).
    H(0) = 0 holds for all kinds by construction; the slope a is validated
    against the growth bound when the source is configured, not per call.
    """

    kind: str
    coeff: float = 0.0
    bound: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "bounded_slope"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind != "zero" and abs(self.coeff) > self.bound:
            raise ValueError(
                f"source slope |{self.coeff}| exceeds the growth bound {self.bound}"
            )

    @classmethod
    def zero(cls) -> "Source":
        return cls("zero")

    @classmethod
    def linear(cls, a: float, bound: float | None = None) -> "Source":
        return cls("linear", a, abs(a) if bound is None else bound)

    @classmethod
    def bounded_slope(cls, a: float, bound: float | None = None) -> "Source":
        return cls("bounded_slope", a, abs(a) if bound is None else bound)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or self.coeff == 0.0

    def __call__(self, u):
        if self.kind == "zero":
            return np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0
        if self.kind == "linear":
            return self.coeff * np.asarray(u, dtype=float) if np.ndim(u) else self.coeff * u
        return self.coeff * np.sin(u)


def source_term(u, source: Source):
    """Evaluate the configured zero-order term at u."""
    return source(u)
