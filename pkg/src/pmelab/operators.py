"""Discrete weighted elliptic operator and the nonlinear transforms.

The operator is the conservative divergence form

    (L u)_i = [pi_{i+1/2} (u_{i+1} - u_i) - pi_{i-1/2} (u_i - u_{i-1})] / (pi_i h^2)

assembled flux-first so that the zero-flux mass identity telescopes exactly.
The equation prefactor 1/(1+beta) is *not* included here; it lives in the
solver configuration as ``c_eq``.

Boundary handling:
  zero_flux  boundary face fluxes are zero,
  dirichlet  ghost value 2 g - u_boundary, i.e. value g at the wall to
             second order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, ShapeError
from .mesh import DensityField, WeightedMesh

BC_KINDS = ("zero_flux", "dirichlet")


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str = "zero_flux"
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ParameterError(f"unknown boundary condition {self.kind!r}")
        v = float(self.value)
        if not np.isfinite(v) or v < 0.0:
            raise ParameterError(f"dirichlet value must be finite and >= 0, got {v}")
        object.__setattr__(self, "value", v)


ZERO_FLUX = BoundaryCondition("zero_flux")


def _check_cell_vector(u, mesh):
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_cells,):
        raise ShapeError(f"expected {mesh.n_cells} cell values, got shape {u.shape}")
    return u


def face_fluxes(u, mesh: WeightedMesh, bc: BoundaryCondition = ZERO_FLUX):
    """Weighted face fluxes G_j = pi_{j-1/2} (u_j - u_{j-1}) / h, j = 0..n.

    Boundary entries follow the boundary condition (zero under zero_flux,
    ghost-extrapolated under dirichlet).
    """
    u = _check_cell_vector(u, mesh)
    pf = mesh.face_weights
    h = mesh.h
    g = np.empty(mesh.n_cells + 1)
    g[1:-1] = pf[1:-1] * np.diff(u) / h
    if bc.kind == "zero_flux":
        g[0] = 0.0
        g[-1] = 0.0
    else:
        # ghost values 2g - u reduce the one-sided difference to 2(u_0 - g)/h
        g[0] = pf[0] * 2.0 * (u[0] - bc.value) / h
        g[-1] = pf[-1] * 2.0 * (bc.value - u[-1]) / h
    return g


def apply_L(u, mesh: WeightedMesh, bc: BoundaryCondition = ZERO_FLUX):
    """Apply the weighted operator L = pi^{-1} d/dx (pi d/dx) to a cell vector."""
    u = _check_cell_vector(u, mesh)
    if not np.all(np.isfinite(u)):
        raise DomainError("operator input contains non-finite entries")
    g = face_fluxes(u, mesh, bc)
    return np.diff(g) / (mesh.cell_weights * mesh.h)


def stencil_bands(mesh: WeightedMesh, bc: BoundaryCondition = ZERO_FLUX):
    """Tridiagonal representation L u = A u + b.

    Returns (lower, diag, upper, b) where lower[i] multiplies u_{i-1}
    (lower[0] unused), upper[i] multiplies u_{i+1} (upper[-1] unused) and b is
    the affine boundary contribution (nonzero only for dirichlet).
    """
    n = mesh.n_cells
    pf = mesh.face_weights.copy()
    pc = mesh.cell_weights
    h2 = mesh.h * mesh.h

    left = pf[:-1].copy()
    right = pf[1:].copy()
    b = np.zeros(n)
    if bc.kind == "zero_flux":
        left[0] = 0.0
        right[-1] = 0.0
    else:
        # ghost elimination doubles the boundary-face coefficient
        b[0] = 2.0 * pf[0] * bc.value / (pc[0] * h2)
        b[-1] += 2.0 * pf[-1] * bc.value / (pc[-1] * h2)
        left[0] *= 2.0
        right[-1] *= 2.0

    diag = -(left + right) / (pc * h2)
    lower = np.zeros(n)
    upper = np.zeros(n)
    lower[1:] = pf[1:-1] / (pc[1:] * h2)
    upper[:-1] = pf[1:-1] / (pc[:-1] * h2)
    return lower, diag, upper, b


def psi(fld: DensityField, beta: float):
    """Degenerate nonlinearity mu -> mu^(1+beta), elementwise."""
    if beta <= 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    return fld.values ** (1.0 + beta)


def pressure(fld: DensityField, beta: float):
    """Pressure transform mu -> (beta+1) mu^beta / beta, elementwise."""
    if beta <= 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    return (beta + 1.0) / beta * fld.values**beta


def dirichlet_energy(u, mesh: WeightedMesh) -> float:
    """Weighted Dirichlet form h * sum over interior faces of pi (du/h)^2."""
    u = _check_cell_vector(u, mesh)
    if not np.all(np.isfinite(u)):
        raise DomainError("energy input contains non-finite entries")
    d = np.diff(u) / mesh.h
    return float(mesh.h * np.sum(mesh.face_weights[1:-1] * d * d))


def weighted_inner(u, v, mesh: WeightedMesh) -> float:
    """Discrete L2(pi) inner product h * sum(u_i v_i pi_i)."""
    u = _check_cell_vector(u, mesh)
    v = _check_cell_vector(v, mesh)
    return float(mesh.h * np.sum(u * v * mesh.cell_weights))
