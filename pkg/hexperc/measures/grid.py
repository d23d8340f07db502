"""grid.py

eps-Grid Approximation of the Important-Site Count: the Grid Count Y, the beta Factor,
the L2 Comparison of X with beta Y, and the Scaling Covariance Check

"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..arms.arm_events import A_important_sites, hole_arms_geometry, hole_arms_state
from ..coupling.conditional import AllOf, ArmsFromHole, ConditionalSampler, CrossesBox, run_conditioned
from ..errors import GeometryError
from ..explore.interfaces import annulus_layers
from ..lattice.geometry import Annulus, Box, EpsGrid, box_quad, grid_squares_in
from ..runner.sharding import map_indices
from ..sampling.configuration import sample
from ..stats.estimates import Estimate, RatioEstimate

logger = logging.getLogger(__name__)

SCALING_EXPONENT = 0.75
MIN_ACCEPTANCE = 1e-4


class GridCounter:
    """
    Counts the Grid Squares Q Inside a Box with Four Alternating Arms from 2Q

    An Annulus target asks for arms to the boundary of its outer box; a Box target is
    read as a quad and asks for open arms to its left and right sides and closed arms
    to its lower and upper sides.
    """

    def __init__(self, box, target, grid, mesh):
        """Precomputes the Arm Geometry of Every Square

        Parameters
        ----------
        box : Box
            Box Whose Squares Are Counted
        target : Annulus or Box
            Where the Arms Go
        grid : EpsGrid
            The eps-Grid
        mesh : float
            Lattice Mesh

        Raises
        ------
        GeometryError
            If eps Is at Most Two Meshes
        """
        if grid.eps <= 2.0 * mesh:
            raise GeometryError("grid too fine for mesh")
        if isinstance(target, Annulus):
            self.outer, self.prescribed = target.outer_box, False
        elif isinstance(target, Box):
            self.outer, self.prescribed = target, True
        else:
            raise ValueError(f"Not a known grid target: {target!r}")
        self.box = box
        self.grid = grid
        self.mesh = mesh
        self.squares = grid_squares_in(grid, box)
        self.geometries = [
            hole_arms_geometry(square.doubled, self.outer, mesh, self.prescribed) for square in self.squares
        ]
        logger.debug("grid counter: %d squares of radius %g at mesh %g", len(self.squares), grid.eps, mesh)

    def __len__(self):
        return len(self.squares)

    def events(self, config):
        """Boolean per Square"""
        return np.array(
            [
                geometry.domain.crossing_count(hole_arms_state(config, geometry)) >= 4
                for geometry in self.geometries
            ],
            dtype=bool,
        )

    def count(self, config):
        return int(self.events(config).sum())

    def covered(self, positions):
        """Mask of Points Lying in One of the Counted Squares"""
        mask = np.zeros(len(positions), dtype=bool)
        for square in self.squares:
            mask |= square.square.contains(positions)
        return mask


@lru_cache(maxsize=8)
def grid_counter(box, target, grid, mesh):
    return GridCounter(box, target, grid, mesh)


def grid_count_Y(config, box, target, grid):
    """Number of Grid Squares Q in box with Four Alternating Arms from 2Q to the Target"""
    return grid_counter(box, target, grid, config.mesh).count(config)


@dataclass(frozen=True)
class ImportantCount:
    annulus: Annulus

    def __call__(self, config):
        return int(A_important_sites(config, self.annulus).sum())


def estimate_beta(eps, mesh, a=(0.0, 0.0), theta=0.0, n=100, seed=0, hat=False, budget=None, workers=1):
    """Conditional Mean Number of Important Sites in a Small Square

    beta is the expected number of sites of Q0 = B(a, eps) having four alternating
    arms to the boundary of B(a, 1), given open arms from B(a, 2 eps) to the left and
    right sides and closed arms to the lower and upper sides of B(a, 1). With hat,
    the conditioning also asks for an open left-right crossing of B(a, 1).

    Parameters
    ----------
    eps : float
        Square Radius
    mesh : float
        Lattice Mesh
    a : (float, float)
        Square Centre
    theta : float
        Grid Angle
    n : int
        Accepted Samples Wanted
    seed : int
        Run Seed
    hat : bool
        Add the Crossing Condition
    budget : int, optional
        Rejection Attempts, by Default Enough for an Acceptance Rate of 1e-4
    workers : int
        Worker Processes

    Returns
    -------
    Estimate
        With Acceptance Bookkeeping in params

    Raises
    ------
    BudgetExhaustedError
        If No Proposal Is Accepted
    """
    if not 0 < 2.0 * eps < 1.0:
        raise GeometryError("beta needs 0 < 2 eps < 1")
    outer = Box(a, 1.0, theta)
    annulus = Annulus(a, eps, 1.0, theta)
    event = ArmsFromHole(Box(a, 2.0 * eps, theta), outer, True)
    if hat:
        event = AllOf((event, CrossesBox(outer)))
    region = box_quad(outer, mesh).sites
    budget = budget or int(math.ceil(n / MIN_ACCEPTANCE))
    sampler = ConditionalSampler(region, event, budget, seed)
    run = run_conditioned(sampler, n, ImportantCount(annulus), workers)
    params = {
        "eps": eps,
        "mesh": mesh,
        "theta": theta,
        "hat": hat,
        "attempts": run.attempts,
        "acceptance_rate": run.acceptance_rate,
    }
    estimate = Estimate.from_samples(np.array(run.values, dtype=np.int64), seed, params)
    logger.info(
        "beta(eps=%g, mesh=%g, hat=%s) = %.4g +- %.2g, acceptance %.3g",
        eps,
        mesh,
        hat,
        estimate.mean,
        estimate.stderr,
        run.acceptance_rate,
    )
    return estimate


@dataclass(frozen=True)
class _XYJob:
    annulus: Annulus
    box: Box
    grid: EpsGrid
    mesh: float
    seed: int

    def __call__(self, index):
        layers = annulus_layers(self.annulus, self.mesh)
        counter = grid_counter(self.box, self.annulus, self.grid, self.mesh)
        config = sample(layers.full, self.seed, index)
        important = A_important_sites(config, self.annulus)
        positions = layers.hole.positions
        in_box = self.box.contains(positions)
        covered = counter.covered(positions)
        x_grid = int((important & in_box & covered).sum())
        x_ext = int((important & in_box & ~covered).sum())
        return x_grid, x_ext, counter.count(config)


def l2_ratio(x, y, beta):
    """E[(X - beta Y)^2] / E[X]^2 with a Delta-Method Standard Error"""
    x = np.asarray(x, dtype=float)
    d = (x - beta * np.asarray(y, dtype=float)) ** 2
    n = len(x)
    mx, md = x.mean(), d.mean()
    if mx == 0:
        return float("nan"), float("nan")
    vx, vd = x.var(), d.var()
    cov = ((x - mx) * (d - md)).mean()
    var = (vd / mx ** 4 + 4.0 * md ** 2 * vx / mx ** 6 - 4.0 * md * cov / mx ** 5) / n
    return float(md / mx ** 2), float(math.sqrt(max(var, 0.0)))


def xy_l2_experiment(annulus, box, eps_list, mesh, n, seed, mesh_ratio=None, beta_n=100, workers=1):
    """Compares the Important-Site Count X in box with beta Times the Grid Count Y

    X and Y come from the same configurations. X is split into the sites inside the
    counted grid squares and the remaining boundary sites; only the first part has a
    counterpart in Y.

    Parameters
    ----------
    annulus : Annulus
        Annulus Whose Inner Face Contains box
    box : Box
        Counting Box
    eps_list : list of float
        Grid Square Radii
    mesh : float
        Lattice Mesh, Ignored When mesh_ratio Is Given
    n : int
        Samples per eps
    seed : int
        Run Seed
    mesh_ratio : float, optional
        Use mesh = mesh_ratio * eps for Each eps
    beta_n : int
        Accepted Samples for the beta Estimate
    workers : int
        Worker Processes

    Returns
    -------
    list of dict
        One Row per eps
    """
    if not annulus.inner_box.contains_box(box):
        raise GeometryError("counting box must lie in the inner face of the annulus")
    rows = []
    for eps in eps_list:
        eta = mesh_ratio * eps if mesh_ratio else mesh
        grid = EpsGrid(eps)
        job = _XYJob(annulus, box, grid, eta, seed)
        samples = np.array(map_indices(job, range(n), workers), dtype=np.int64).reshape(-1, 3)
        x = samples[:, 0] + samples[:, 1]
        y = samples[:, 2]
        beta = estimate_beta(eps, eta, n=beta_n, seed=seed, workers=workers)
        ratio, stderr = l2_ratio(x, y, beta.mean)
        zero_x = not np.any(x)
        if zero_x:
            logger.warning("xy experiment: X vanished on all %d samples at eps %g", n, eps)
        rows.append(
            {
                "eps": eps,
                "mesh": eta,
                "n": n,
                "seed": seed,
                "squares": len(grid_counter(box, annulus, grid, eta)),
                "mean_x": float(x.mean()),
                "mean_x_grid": float(samples[:, 0].mean()),
                "mean_x_ext": float(samples[:, 1].mean()),
                "mean_y": float(y.mean()),
                "beta": beta.mean,
                "beta_stderr": beta.stderr,
                "beta_attempts": beta.params["attempts"],
                "beta_acceptance": beta.params["acceptance_rate"],
                "l2_ratio": ratio,
                "l2_stderr": stderr,
                "zero_x": zero_x,
            }
        )
        logger.info("xy experiment eps=%g mesh=%g: ratio %.4g +- %.2g", eps, eta, ratio, stderr)
    return rows


@dataclass(frozen=True)
class _ScalingJob:
    annulus: Annulus
    box: Box
    lam: float
    mesh: float
    seed: int

    def _count(self, config, annulus, box):
        layers = annulus_layers(annulus, self.mesh)
        important = A_important_sites(config, annulus)
        return int((important & box.contains(layers.hole.positions)).sum())

    def __call__(self, index):
        big, big_box = self.annulus.scaled(self.lam), self.box.scaled(self.lam)
        region = annulus_layers(big, self.mesh).full.union(annulus_layers(self.annulus, self.mesh).full)
        config = sample(region, self.seed, index)
        return self._count(config, big, big_box), self._count(config, self.annulus, self.box)


def scaling_covariance_experiment(annulus, box, lam, mesh, n, seed, workers=1):
    """Ratio of Expected Important-Site Counts Under Scaling by lam at Fixed Mesh

    At a common mesh the normalizations cancel, and the ratio of counts of
    lam A-important sites in lam B to A-important sites in B approaches lam ** (3/4).

    Returns
    -------
    dict
        Paired Ratio, Standard Error and the Scaling Prediction
    """
    if lam <= 0:
        raise ValueError("scaling factor must be positive")
    job = _ScalingJob(annulus, box, float(lam), mesh, seed)
    samples = np.array(map_indices(job, range(n), workers), dtype=np.int64).reshape(-1, 2)
    ratio = RatioEstimate.from_samples(samples[:, 0], samples[:, 1], seed, {"lam": lam, "mesh": mesh})
    expected = lam ** SCALING_EXPONENT
    row = ratio.to_row()
    row.update(
        expected=expected,
        relative_error=abs(ratio.value / expected - 1.0) if ratio.sy else float("nan"),
        mean_scaled=ratio.numerator.mean,
        mean_base=ratio.denominator.mean,
    )
    logger.info("scaling covariance lam=%g: %.4g +- %.2g (expected %.4g)", lam, ratio.value, ratio.stderr, expected)
    return row
