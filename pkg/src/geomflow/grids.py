"""Sampled rotationally symmetric conformal metrics on uniform 1-d grids.

A grid stores the conformal factor u > 0 of g = u * (flat chart metric) at
uniformly spaced nodes of one generator line:

  radial   : nodes are rho in [0, extent], g = u(rho) (drho^2 + rho^2 dtheta^2)
             written conformally on the plane, u sampled along a ray;
  cylinder : nodes are x in [x_lo, x_hi], g = u(x) (dx^2 + dtheta^2) on
             R x S^1 with theta of period 2*pi.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from .errors import DomainError, ExtentError

if TYPE_CHECKING:  # pragma: no cover - import cycle guard for annotations only
    from .exact import ExactSolutionSpec

RADIAL = "radial"
CYLINDER = "cylinder"
CHARTS = (RADIAL, CYLINDER)

# Outermost nodes use one-sided stencils and feel the boundary condition;
# reported extrema and tail estimates stay this many nodes inside.
RELIABLE_MARGIN = 5

# Below this conformal factor the discrete curvature -lap(log u)/u is pure
# roundoff amplified by 1/u; max-hunting ops ignore such nodes. Integrated
# quantities keep them (the 1/u amplification cancels against the measure).
U_NOISE_FLOOR = 1e-7

MIN_NODES = 16


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=float).copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ConformalGrid:
    """Immutable snapshot of a conformal factor at time t on one chart."""

    chart: str
    nodes: np.ndarray
    u: np.ndarray
    t: float
    provenance: "ExactSolutionSpec | None" = None
    h: float = field(init=False)

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise DomainError(f"unknown chart {self.chart!r}")
        nodes = _readonly(self.nodes)
        u = _readonly(self.u)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "u", u)
        if nodes.ndim != 1 or nodes.shape != u.shape:
            raise DomainError("nodes and u must be matching 1-d arrays")
        n = nodes.size
        if n < MIN_NODES:
            raise DomainError(f"grid needs at least {MIN_NODES} nodes, got {n}")
        steps = np.diff(nodes)
        h = float(steps[0])
        if h <= 0.0 or not np.allclose(steps, h, rtol=1e-9, atol=0.0):
            raise DomainError("nodes must be uniformly spaced and increasing")
        if self.chart == RADIAL and abs(float(nodes[0])) > 1e-12 * h:
            raise DomainError("radial grids must start at the axis rho = 0")
        if not np.all(np.isfinite(u)) or not np.all(u > 0.0):
            raise DomainError("conformal factor must be finite and positive")
        object.__setattr__(self, "h", h)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def extent(self) -> float:
        return float(self.nodes[-1])

    def reliable_slice(self) -> slice:
        """Nodes far enough from outer boundaries to trust pointwise stats."""
        if self.chart == RADIAL:
            return slice(0, self.n - RELIABLE_MARGIN)
        return slice(RELIABLE_MARGIN, self.n - RELIABLE_MARGIN)

    def reliable_mask(self) -> np.ndarray:
        """Reliable-slice mask minus nodes drowned in 1/u roundoff noise."""
        mask = np.zeros(self.n, dtype=bool)
        mask[self.reliable_slice()] = True
        mask &= self.u >= U_NOISE_FLOOR
        if not mask.any():  # degenerate: keep the best-conditioned node
            mask[int(np.argmax(self.u))] = True
        return mask

    def with_u(self, u: np.ndarray, t: float | None = None) -> "ConformalGrid":
        return replace(self, u=u, t=self.t if t is None else float(t))

    def index_of(self, coord: float) -> int:
        """Nearest node index for a coordinate inside the extent."""
        lo, hi = float(self.nodes[0]), float(self.nodes[-1])
        if coord < lo - 1e-12 or coord > hi + 1e-12:
            raise ExtentError(f"coordinate {coord} outside [{lo}, {hi}]")
        return int(round((coord - lo) / self.h))
