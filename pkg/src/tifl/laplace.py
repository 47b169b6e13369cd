"""Finite-difference solver for the same boundary-value problem as the
analytic engine, used as an independent numerical cross-check.

The ball is voxelized on a uniform Cartesian grid (staircase mask of
cell centers).  Current conservation over each interior cell gives a
7-point graph Laplacian in which faces shared with outside cells simply
drop out; that is the ghost-cell mirror of the insulating (zero normal
current) boundary condition.  The injected and withdrawn currents enter
as flux sources on the interior cells nearest each electrode, so the
discrete compatibility condition (sources sum to zero) holds exactly
for a bipolar pair.

The Neumann problem fixes the potential only up to a constant; the
returned solution is gauge-fixed to zero mean over interior cells,
which matches the analytic series (every term of which has zero mean
over the ball).  The linear system is solved by conjugate gradients
with an algebraic-multigrid preconditioner; the contract is the
residual tolerance, not the iteration scheme.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fields import potential_points
from .geometry import ElectrodePair, SphereModel

__all__ = [
    "NoConvergence",
    "GridSolution",
    "solve_laplace_grid",
    "solve_laplace_grid_multi",
    "analytic_discrepancy",
]


class NoConvergence(RuntimeError):
    """Iterative solve failed to reach the residual tolerance."""

    def __init__(self, iterations: int, residual: float, tol: float):
        self.iterations = iterations
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"residual {residual:.3e} above tol {tol:.3e} after {iterations} iterations"
        )


@dataclass(frozen=True)
class GridSolution:
    """Masked-ball finite-difference solution of one pair's potential."""

    grid_n: int
    spacing: float
    points: np.ndarray  # (m, 3) interior cell centers
    potential: np.ndarray  # (m,) volts, zero mean
    residual: float
    iterations: int
    anode_cell: int
    cathode_cell: int


def _masked_ball_laplacian(grid_n: int, radius: float):
    axis = np.linspace(-radius, radius, grid_n)
    spacing = axis[1] - axis[0]
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    inside = gx * gx + gy * gy + gz * gz < radius * radius
    index = -np.ones((grid_n, grid_n, grid_n), dtype=np.int64)
    count = int(inside.sum())
    index[inside] = np.arange(count)

    rows, cols, vals = [], [], []
    degree = np.zeros(count)
    for axis_k in range(3):
        for shift in (1, -1):
            neighbor = np.roll(index, -shift, axis=axis_k)
            edge = [slice(None)] * 3
            edge[axis_k] = -1 if shift == 1 else 0
            neighbor[tuple(edge)] = -1  # roll wraps around; sever it
            valid = inside & (neighbor >= 0)
            a = index[valid]
            rows.append(a)
            cols.append(neighbor[valid])
            vals.append(-np.ones(a.size))
            np.add.at(degree, a, 1.0)
    rows.append(np.arange(count))
    cols.append(np.arange(count))
    vals.append(degree)
    lap = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(count, count),
    )
    pts = np.column_stack([gx[inside], gy[inside], gz[inside]])
    return lap, pts, spacing


def solve_laplace_grid_multi(
    pairs,
    model: SphereModel,
    grid_n: int = 65,
    tol: float = 1e-8,
    max_iterations: int = 5000,
) -> GridSolution:
    """Solve the insulated-ball potential with several pairs driven
    together (their sources superpose on the same grid)."""
    if grid_n < 33:
        raise ValueError(f"grid_n must be >= 33, got {grid_n}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one pair")

    lap, pts, spacing = _masked_ball_laplacian(grid_n, model.radius)

    from .fields import pair_sites_cartesian

    rhs = np.zeros(pts.shape[0])
    anode_cell = cathode_cell = -1
    for pair in pairs:
        anode, cathode = pair_sites_cartesian(pair, model)
        a_cell = int(np.argmin(((pts - anode) ** 2).sum(axis=1)))
        c_cell = int(np.argmin(((pts - cathode) ** 2).sum(axis=1)))
        if a_cell == c_cell:
            raise ValueError("grid too coarse: both electrodes map to the same cell")
        flux = pair.current / (model.conductivity * spacing)
        rhs[a_cell] += flux
        rhs[c_cell] -= flux
        anode_cell, cathode_cell = a_cell, c_cell

    import pyamg

    # classical AMG: deterministic setup, unlike the smoothed-aggregation
    # variant whose spectral-radius estimates draw from the global RNG
    ml = pyamg.ruge_stuben_solver(lap, max_coarse=200)
    preconditioner = ml.aspreconditioner(cycle="V")
    iterations = 0

    def _count(_):
        nonlocal iterations
        iterations += 1

    solution, _info = spla.cg(
        lap, rhs, rtol=tol, maxiter=max_iterations, M=preconditioner, callback=_count
    )
    residual = float(np.linalg.norm(lap @ solution - rhs) / np.linalg.norm(rhs))
    if residual > tol:
        raise NoConvergence(iterations, residual, tol)

    solution = solution - solution.mean()
    return GridSolution(
        grid_n=grid_n,
        spacing=float(spacing),
        points=pts,
        potential=solution,
        residual=residual,
        iterations=iterations,
        anode_cell=anode_cell,
        cathode_cell=cathode_cell,
    )


def solve_laplace_grid(
    pair: ElectrodePair,
    model: SphereModel,
    grid_n: int = 65,
    tol: float = 1e-8,
    max_iterations: int = 5000,
) -> GridSolution:
    """Solve the insulated-ball potential of one pair on a voxel grid.

    Parameters
    ----------
    grid_n : int
        Samples per axis over [-R, R]; must be at least 33 so the
        staircase ball is resolved.
    tol : float
        Relative residual |L v - b| / |b| required of the solution.
    max_iterations : int
        Conjugate-gradient iteration cap.

    Raises
    ------
    NoConvergence
        If the residual is still above ``tol`` after the iteration cap.
    """
    return solve_laplace_grid_multi(
        [pair], model, grid_n=grid_n, tol=tol, max_iterations=max_iterations
    )


def analytic_discrepancy(
    solution: GridSolution,
    pair: ElectrodePair,
    model: SphereModel,
    min_electrode_distance: float = 0.2,
) -> float:
    """Relative L2 difference between the grid solution and the closed
    form, over interior cells at least ``min_electrode_distance`` times
    the radius away from both electrodes."""
    from .fields import pair_sites_cartesian

    anode, cathode = pair_sites_cartesian(pair, model)
    cut = min_electrode_distance * model.radius
    far = (np.linalg.norm(solution.points - anode, axis=1) >= cut) & (
        np.linalg.norm(solution.points - cathode, axis=1) >= cut
    )
    reference = potential_points(solution.points[far], pair, model)
    return float(
        np.linalg.norm(solution.potential[far] - reference) / np.linalg.norm(reference)
    )
