"""Truncated 1-D domain with normalized Gibbs weights.

The computational measure is the discrete probability measure with cell
weights ``pi_i = exp(-V(x_i)) / Z_h`` on a uniform grid over ``[-R, R]``,
``Z_h = h * sum(exp(-V(x_i)))``. Face weights are pointwise evaluations of
the same density at face midpoints, which makes the weighted divergence-form
operator exactly self-adjoint in the pi-weighted inner product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, MeshConstructionError, ParameterError, ShapeError

POTENTIAL_KINDS = ("gaussian", "smoothed_power", "double_well", "flat")


@dataclass(frozen=True)
class Potential:
    """Analytic confining potential with evaluable value and derivative.

    kinds:
      gaussian        V(x) = a * x^2 / 2,            params = (a,), default a = 1
      smoothed_power  V(x) = (x^2 + delta^2)^(alpha/2), params = (alpha, delta),
                      default delta = 1e-2 so V stays smooth for alpha < 2
      double_well     V(x) = (x^2 - a^2)^2 / 4,      params = (a,), default a = 1
      flat            V(x) = 0; admissible only because the domain is bounded
    """

    kind: str
    params: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ParameterError(f"unknown potential kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind == "smoothed_power":
            alpha, delta = self._power_params()
            if alpha <= 0:
                raise ParameterError(f"smoothed_power needs alpha > 0, got {alpha}")
            if delta <= 0:
                raise ParameterError(f"smoothed_power needs delta > 0, got {delta}")
        if self.kind in ("gaussian", "double_well"):
            a = self.params[0] if self.params else 1.0
            if a <= 0:
                raise ParameterError(f"{self.kind} scale parameter must be > 0, got {a}")

    def _power_params(self):
        alpha = self.params[0] if len(self.params) >= 1 else 1.0
        delta = self.params[1] if len(self.params) >= 2 else 1e-2
        return alpha, delta

    def value(self, x):
        """V(x), elementwise."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            a = self.params[0] if self.params else 1.0
            return 0.5 * a * x * x
        if self.kind == "smoothed_power":
            alpha, delta = self._power_params()
            return (x * x + delta * delta) ** (0.5 * alpha)
        if self.kind == "double_well":
            a = self.params[0] if self.params else 1.0
            return 0.25 * (x * x - a * a) ** 2
        return np.zeros_like(x)

    def grad(self, x):
        """V'(x), elementwise."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            a = self.params[0] if self.params else 1.0
            return a * x
        if self.kind == "smoothed_power":
            alpha, delta = self._power_params()
            return alpha * x * (x * x + delta * delta) ** (0.5 * alpha - 1.0)
        if self.kind == "double_well":
            a = self.params[0] if self.params else 1.0
            return x * (x * x - a * a)
        return np.zeros_like(x)


@dataclass(frozen=True)
class WeightedMesh:
    """Uniform cell grid on [-R, R] with normalized Gibbs weights.

    cell_weights has one entry per cell, face_weights has n_cells + 1 entries
    (boundary faces included). h * sum(cell_weights) == 1 by construction.
    """

    potential: Potential
    half_width: float
    n_cells: int
    h: float
    centers: np.ndarray
    cell_weights: np.ndarray
    face_weights: np.ndarray
    normalizer: float

    @property
    def faces(self):
        return np.linspace(-self.half_width, self.half_width, self.n_cells + 1)

    @property
    def cfl_weight_max(self):
        """max over cells of (pi_{i-1/2} + pi_{i+1/2}) / pi_i, used by CFL."""
        pf = self.face_weights
        return float(np.max((pf[:-1] + pf[1:]) / self.cell_weights))

    def integrate(self, values):
        """h * sum(values_i * pi_i), the discrete integral against d(pi)."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.cell_weights.shape:
            raise ShapeError(
                f"expected {self.n_cells} cell values, got shape {values.shape}"
            )
        return float(self.h * np.sum(values * self.cell_weights))


@dataclass(frozen=True)
class DensityField:
    """Cell-centered nonnegative density values at one time instant."""

    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1:
            raise ShapeError(f"density must be a 1-D cell vector, got ndim={values.ndim}")
        if not np.all(np.isfinite(values)):
            raise DomainError("density contains non-finite entries")
        if np.any(values < 0.0):
            i = int(np.argmin(values))
            raise DomainError(f"density must be nonnegative; cell {i} holds {values[i]}")

    def __len__(self):
        return self.values.shape[0]


def build_mesh(potential: Potential, R: float, n: int) -> WeightedMesh:
    """Build the weighted mesh for `potential` on [-R, R] with n cells.

    Weights are computed from shifted exponentials exp(-(V - min V)) so that
    strongly confining potentials do not underflow the cell weights; the
    reported normalizer is still Z_h = h * sum(exp(-V(x_i))).
    """
    if R <= 0:
        raise ParameterError(f"half width must be positive, got {R}")
    n = int(n)
    if n < 2:
        raise ParameterError(f"need at least 2 cells, got {n}")
    h = 2.0 * R / n
    centers = -R + (np.arange(n) + 0.5) * h
    faces = np.linspace(-R, R, n + 1)

    v_cells = np.asarray(potential.value(centers), dtype=float)
    v_faces = np.asarray(potential.value(faces), dtype=float)
    for xs, vs in ((centers, v_cells), (faces, v_faces)):
        bad = ~np.isfinite(vs)
        if np.any(bad):
            x_bad = xs[bad][0]
            raise MeshConstructionError(
                f"potential {potential.kind!r} is not finite at x = {x_bad}"
            )

    v_min = min(float(np.min(v_cells)), float(np.min(v_faces)))
    e_cells = np.exp(-(v_cells - v_min))
    e_faces = np.exp(-(v_faces - v_min))
    if np.any(e_cells == 0.0) or np.any(e_faces == 0.0):
        raise MeshConstructionError(
            f"potential {potential.kind!r} underflows to zero weight on [-{R}, {R}]"
        )
    shifted_sum = float(np.sum(e_cells))
    cell_weights = e_cells / (h * shifted_sum)
    face_weights = e_faces / (h * shifted_sum)
    normalizer = h * shifted_sum * np.exp(-v_min)

    return WeightedMesh(
        potential=potential,
        half_width=float(R),
        n_cells=n,
        h=h,
        centers=centers,
        cell_weights=cell_weights,
        face_weights=face_weights,
        normalizer=float(normalizer),
    )


def lp_norm(fld: DensityField, mesh: WeightedMesh, p: float) -> float:
    """(h * sum(mu_i^p * pi_i))^(1/p) against the normalized weights."""
    if p <= 0:
        raise ParameterError(f"lp_norm needs p > 0, got {p}")
    mu = fld.values
    if mu.shape[0] != mesh.n_cells:
        raise ShapeError(
            f"field has {mu.shape[0]} cells but mesh has {mesh.n_cells}"
        )
    return float(mesh.integrate(mu**p) ** (1.0 / p))


def mass(fld: DensityField, mesh: WeightedMesh) -> float:
    """Total mass h * sum(mu_i * pi_i)."""
    return mesh.integrate(fld.values)
