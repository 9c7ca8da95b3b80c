"""Core model definitions for an SIRS system with outside transmission.

Three equivalent views of the same epidemic model are provided, each as a
right-hand-side function suitable for numerical work:

* ``population_rhs``  -- raw head counts (S, I, R) with demography::

      S' = b*N - (d + beta)*S + gamma*R - lam*I*S/N
      I' = beta1*S - (d + eps1 + alpha)*I + lam*I*S/N
      R' = beta2*S - (d + eps2 + gamma)*R + alpha*I

  where N = S + I + R, beta = beta1 + beta2.  Summing the three lines gives
  N' = (b - d)*N - eps1*I - eps2*R.

* ``proportion_rhs`` -- fractions (s, i, r) = (S, I, R)/N.  The natural death
  rate d cancels out entirely::

      s' = b - (b + beta)*s + gamma*r + (eps1 - lam)*i*s + eps2*r*s
      i' = beta1*s - (b + eps1 + alpha)*i + lam*i*s + eps1*i**2 + eps2*i*r
      r' = beta2*s - (b + eps2 + gamma)*r + alpha*i + eps1*i*r + eps2*r**2

  The sum sigma = s + i + r obeys sigma' = (1 - sigma)*(b - eps1*i - eps2*r),
  so the plane sigma = 1 is invariant.

* ``planar_rhs`` -- the reduction to (s, i) on sigma = 1, a quadratic planar
  vector field on the closed triangle D1 = {s >= 0, i >= 0, s + i <= 1}::

      s' = b + gamma + (eps2 - b - beta - gamma)*s - gamma*i
           - eps2*s**2 + (eps1 - eps2 - lam)*i*s
      i' = beta1*s + (eps2 - eps1 - alpha - b)*i
           + (lam - eps2)*i*s + (eps1 - eps2)*i**2

Outside transmission (beta1 into I, beta2 into R) keeps the model open: new
arrivals may already be infective or removed.  With beta > 0 and all other
rates positive the planar field points strictly inward on the boundary of D1.
The special case b = beta1 = gamma = 0 makes both axes invariant and is the
seed for the bistable construction in :mod:`opensirs.analysis`.

All RHS functions broadcast over leading axes: an input of shape (..., dim)
yields an output of the same shape.  Everything is evaluated in float64.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from math import isfinite

import numpy as np

__all__ = [
    "ModelParams",
    "PopulationState",
    "ProportionState",
    "PlanarState",
    "InwardnessReport",
    "SIMPLEX_TOL",
    "population_rhs",
    "proportion_rhs",
    "planar_rhs",
    "planar_field",
    "boundary_inwardness",
    "dulac_curl",
]

# Absolute tolerance for membership tests on the simplex and on D1.
SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Nonnegative rate constants of the model.

    Attributes:
        b: per-capita birth rate.
        d: natural death rate (population system only; drops out of the
            proportion and planar systems).
        eps1: excess death rate of infectives.
        eps2: excess death rate of removeds.
        lam: contact (mass-action mixing) rate.
        alpha: recovery rate I -> R.
        gamma: loss-of-immunity rate R -> S.
        beta1: outside transmission into I.
        beta2: outside transmission into R.

    The total outside transmission ``beta = beta1 + beta2`` must be positive;
    each individual rate must be finite and >= 0.  The special case
    b = beta1 = gamma = 0 is allowed (invariant axes) and is reported by
    :attr:`is_special_case`.
    """

    b: float
    d: float
    eps1: float
    eps2: float
    lam: float
    alpha: float
    gamma: float
    beta1: float
    beta2: float

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise TypeError(f"parameter {f.name} must be a real number, got {v!r}")
            v = float(v)
            object.__setattr__(self, f.name, v)
            if not isfinite(v) or v < 0.0:
                raise ValueError(f"parameter {f.name} must be finite and >= 0, got {v}")
        if self.beta <= 0.0:
            raise ValueError("outside transmission beta1 + beta2 must be positive")

    @property
    def beta(self) -> float:
        """Total outside transmission rate beta1 + beta2."""
        return self.beta1 + self.beta2

    @property
    def is_special_case(self) -> bool:
        """True when b = beta1 = gamma = 0 exactly (invariant-axes case)."""
        return self.b == 0.0 and self.beta1 == 0.0 and self.gamma == 0.0

    def is_strictly_positive(self) -> bool:
        """True when every rate entering the planar system is > 0.

        d is excluded: it never appears in the planar or proportion systems.
        """
        return all(
            getattr(self, name) > 0.0
            for name in ("b", "eps1", "eps2", "lam", "alpha", "gamma", "beta1", "beta2")
        )


@dataclass(frozen=True)
class PopulationState:
    """Head counts (S, I, R); all components must be >= 0."""

    S: float
    I: float
    R: float

    def __post_init__(self) -> None:
        for name in ("S", "I", "R"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not isfinite(v) or v < 0.0:
                raise ValueError(f"count {name} must be finite and >= 0, got {v}")

    @property
    def N(self) -> float:
        return self.S + self.I + self.R

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.I, self.R], dtype=float)

    def proportions(self) -> "ProportionState":
        n = self.N
        if n <= 0.0:
            raise ValueError("cannot normalize a population with N = 0")
        return ProportionState(self.S / n, self.I / n, self.R / n)


@dataclass(frozen=True)
class ProportionState:
    """Fractions (s, i, r) of the population in each compartment."""

    s: float
    i: float
    r: float

    def __post_init__(self) -> None:
        for name in ("s", "i", "r"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def sigma(self) -> float:
        return self.s + self.i + self.r

    def on_simplex(self, tol: float = SIMPLEX_TOL) -> bool:
        """Membership in {s, i, r >= 0, s + i + r = 1} within absolute tol."""
        return (
            self.s >= -tol
            and self.i >= -tol
            and self.r >= -tol
            and abs(self.sigma - 1.0) <= tol
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.i, self.r], dtype=float)


@dataclass(frozen=True)
class PlanarState:
    """A point (s, i) of the reduced planar system; r = 1 - s - i implied."""

    s: float
    i: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "i", float(self.i))

    @property
    def r(self) -> float:
        return 1.0 - self.s - self.i

    def in_region(self, tol: float = SIMPLEX_TOL) -> bool:
        """Membership in D1 = {s >= 0, i >= 0, s + i <= 1} within tol."""
        return self.s >= -tol and self.i >= -tol and self.s + self.i <= 1.0 + tol

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.i], dtype=float)


def _coords(x, dim: int) -> np.ndarray:
    """Coerce a state object, sequence, or array to a float array (..., dim)."""
    if hasattr(x, "as_array"):
        arr = x.as_array()
    else:
        arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != dim:
        raise ValueError(f"expected a state with {dim} components, got shape {arr.shape}")
    return arr


def population_rhs(p: ModelParams, x) -> np.ndarray:
    """Time derivative of raw head counts (S, I, R).

    Args:
        p: model parameters.
        x: a PopulationState, or array-like of shape (..., 3).

    Returns:
        Array of the same shape as the input coordinates.

    Raises:
        ValueError: if any state has N = S + I + R <= 0 (the mixing term
            lam*I*S/N is undefined there).
    """
    arr = _coords(x, 3)
    S, I, R = arr[..., 0], arr[..., 1], arr[..., 2]
    N = S + I + R
    if np.any(N <= 0.0):
        raise ValueError("population_rhs requires N = S + I + R > 0")
    mixing = p.lam * I * S / N
    dS = p.b * N - (p.d + p.beta) * S + p.gamma * R - mixing
    dI = p.beta1 * S - (p.d + p.eps1 + p.alpha) * I + mixing
    dR = p.beta2 * S - (p.d + p.eps2 + p.gamma) * R + p.alpha * I
    return np.stack([dS, dI, dR], axis=-1)


def proportion_rhs(p: ModelParams, x) -> np.ndarray:
    """Time derivative of the proportions (s, i, r).

    Valid on all of R^3 as a polynomial field; on the simplex it is the
    normalization of the population system.  d does not appear.  On the
    coordinate planes the field restricts to s = 0: s' = b + gamma*r,
    i = 0: i' = beta1*s, and r = 0: r' = beta2*s + alpha*i.
    """
    arr = _coords(x, 3)
    s, i, r = arr[..., 0], arr[..., 1], arr[..., 2]
    ds = p.b - (p.b + p.beta) * s + p.gamma * r + (p.eps1 - p.lam) * i * s + p.eps2 * r * s
    di = p.beta1 * s - (p.b + p.eps1 + p.alpha) * i + p.lam * i * s + p.eps1 * i * i + p.eps2 * i * r
    dr = p.beta2 * s - (p.b + p.eps2 + p.gamma) * r + p.alpha * i + p.eps1 * i * r + p.eps2 * r * r
    return np.stack([ds, di, dr], axis=-1)


def planar_rhs(p: ModelParams, x) -> np.ndarray:
    """Time derivative of the reduced planar system at (s, i).

    Agrees with the first two components of ``proportion_rhs`` after the
    substitution r = 1 - s - i (exactly in real arithmetic, to rounding in
    float64).  The quadratic form is kept verbatim rather than delegating to
    the 3-d field so the reduction itself stays testable.
    """
    arr = _coords(x, 2)
    s, i = arr[..., 0], arr[..., 1]
    ds = (
        p.b
        + p.gamma
        + (p.eps2 - p.b - p.beta - p.gamma) * s
        - p.gamma * i
        - p.eps2 * s * s
        + (p.eps1 - p.eps2 - p.lam) * i * s
    )
    di = (
        p.beta1 * s
        + (p.eps2 - p.eps1 - p.alpha - p.b) * i
        + (p.lam - p.eps2) * i * s
        + (p.eps1 - p.eps2) * i * i
    )
    return np.stack([ds, di], axis=-1)


def planar_field(p: ModelParams):
    """Return a vectorized callable pts -> planar_rhs(p, pts).

    Convenience for winding-number and contour code that evaluates the field
    on large batches of points of shape (n, 2).
    """

    def field(pts: np.ndarray) -> np.ndarray:
        return planar_rhs(p, pts)

    return field


@dataclass(frozen=True)
class InwardnessReport:
    """Result of sampling the planar field along the three edges of D1.

    ``ok`` is True when the inward-normal component is strictly positive at
    every sample; tangency (component 0, as on the invariant axes of the
    special case) counts as a violation of strict inwardness.
    ``edge_minima`` maps edge name -> the smallest inward component seen on
    that edge.
    """

    ok: bool
    min_inward: float
    worst_edge: str
    worst_point: PlanarState
    n_violations: int
    edge_minima: dict


def boundary_inwardness(p: ModelParams, samples: int = 1000) -> InwardnessReport:
    """Sample the inward-normal field component along the boundary of D1.

    The three edges are sampled at midpoints of a uniform subdivision,
    vertices excluded.  For strictly positive parameters every sample is
    strictly inward; in the special case b = beta1 = gamma = 0 the field is
    tangent on both axes, which this report flags as a violation of strict
    inwardness (the tangency itself is what makes the axes invariant).

    Args:
        p: model parameters.
        samples: total sample budget, split evenly across the edges.

    Returns:
        InwardnessReport; no exception is raised on violations, the caller
        decides how to treat parameters outside the general-case hypothesis.
    """
    if samples < 3:
        raise ValueError("need at least 3 samples (one per edge)")
    m = max(1, samples // 3)
    t = (np.arange(m) + 0.5) / m

    # edge name -> (points, inward normal dot field)
    bottom = np.stack([t, np.zeros_like(t)], axis=-1)
    left = np.stack([np.zeros_like(t), t], axis=-1)
    hyp = np.stack([1.0 - t, t], axis=-1)

    f_bottom = planar_rhs(p, bottom)
    f_left = planar_rhs(p, left)
    f_hyp = planar_rhs(p, hyp)

    per_edge = {
        "i=0": (bottom, f_bottom[..., 1]),                  # inward normal (0, 1)
        "s=0": (left, f_left[..., 0]),                      # inward normal (1, 0)
        "s+i=1": (hyp, -(f_hyp[..., 0] + f_hyp[..., 1]) / np.sqrt(2.0)),
    }

    edge_minima = {}
    worst_edge = ""
    worst_point = PlanarState(0.0, 0.0)
    min_inward = np.inf
    n_violations = 0
    for name, (pts, inward) in per_edge.items():
        k = int(np.argmin(inward))
        edge_minima[name] = float(inward[k])
        n_violations += int(np.count_nonzero(inward <= 0.0))
        if inward[k] < min_inward:
            min_inward = float(inward[k])
            worst_edge = name
            worst_point = PlanarState(pts[k, 0], pts[k, 1])

    return InwardnessReport(
        ok=min_inward > 0.0,
        min_inward=min_inward,
        worst_edge=worst_edge,
        worst_point=worst_point,
        n_violations=n_violations,
        edge_minima=edge_minima,
    )


def dulac_curl(p: ModelParams, x) -> np.ndarray | float:
    """Curl certificate ruling out periodic orbits in the open simplex.

    With g the proportion field rescaled by 1/(s*i*r), the component of
    curl g along (1, 1, 1) is::

        -( (b + gamma)/(i*s**2) + b/(r*s**2) + beta1/(r*i**2)
           + beta2/(i*r**2) + alpha/(s*r**2) )

    which is strictly negative on the open simplex whenever beta > 0.  By a
    Dulac-type argument this excludes closed orbits and phase polygons of the
    planar system in the interior of D1.

    Args:
        p: model parameters.
        x: ProportionState or array-like (..., 3) with s, i, r all > 0.

    Returns:
        The curl component; scalar for a single point, array for a batch.

    Raises:
        ValueError: if any coordinate is <= 0 (the expression has poles on
            the boundary).
    """
    arr = _coords(x, 3)
    s, i, r = arr[..., 0], arr[..., 1], arr[..., 2]
    if np.any(s <= 0.0) or np.any(i <= 0.0) or np.any(r <= 0.0):
        raise ValueError("dulac_curl requires s, i, r all > 0")
    val = -(
        (p.b + p.gamma) / (i * s * s)
        + p.b / (r * s * s)
        + p.beta1 / (r * i * i)
        + p.beta2 / (i * r * r)
        + p.alpha / (s * r * r)
    )
    if np.ndim(val) == 0:
        return float(val)
    return val
