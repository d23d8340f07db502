"""experiments.py

Ratio Limits, Square-vs-Plain Arm Ratios, Two-Point Isotropy, Quasi-Multiplicativity
and Interface Boundary Decay

"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from ..arms.arm_events import ArmPattern, alpha_annulus, arm_event, estimate_alpha, hole_arms_event
from ..connectivity.clusters import connected
from ..explore.interfaces import annulus_layers, chordal_interface
from ..lattice.geometry import Box, box_quad, box_sites, nearest_site
from ..runner.sharding import map_indices
from ..sampling.configuration import sample
from .estimates import Estimate, RatioEstimate
from .fits import CONFIDENCE_Z, fit_exponent

logger = logging.getLogger(__name__)

ARM_EXPONENTS = {"O": 5.0 / 48.0, "OCOC": 1.25}


def alpha_ladder(pattern, meshes, n, seed, workers=1, start=0):
    """alpha(mesh, 1) over a Mesh Ladder with the Exponent Fit Against 1 / mesh

    Returns
    -------
    (list of ArmEstimate, FitResult or None)
        The Fit Is None Below Three Meshes or When an Estimate Vanishes
    """
    estimates = [estimate_alpha(pattern, mesh, 1.0, mesh, n, seed, workers, start) for mesh in meshes]
    points = [(1.0 / e.mesh, e.estimate) for e in estimates]
    if len(points) < 3 or any(e.value <= 0 for e in estimates):
        logger.warning("alpha ladder: no exponent fit for %d scales", len(points))
        return estimates, None
    fit = fit_exponent(points)
    logger.info("alpha_%s exponent %.4g +- %.2g", pattern, fit.slope, fit.half_width)
    return estimates, fit


# ---------------------------------------------------------------------------
# ratio limit


@dataclass(frozen=True)
class _PairedArms:
    first: object
    second: object
    region: object
    pattern: str
    seed: int

    def __call__(self, index):
        config = sample(self.region, self.seed, index)
        return int(arm_event(config, self.first, self.pattern)), int(arm_event(config, self.second, self.pattern))


def ratio_limit_experiment(pattern, r, meshes, n, seed, workers=1):
    """alpha(mesh, r) / alpha(mesh, 1) for Each Mesh, from Paired Samples

    Both events are read off one configuration of Box(1) around the origin site.

    Returns
    -------
    list of dict
        One Row per Mesh, with the Change from the Previous Mesh as a Convergence
        Diagnostic
    """
    pattern = str(ArmPattern.parse(pattern))
    if not 0 < r <= 1:
        raise ValueError("ratio limits need 0 < r <= 1")
    rows = []
    previous = None
    for mesh in meshes:
        small, unit = alpha_annulus(mesh, r, mesh), alpha_annulus(mesh, 1.0, mesh)
        region = annulus_layers(unit, mesh).full
        job = _PairedArms(small, unit, region, pattern, seed)
        samples = np.array(map_indices(job, range(n), workers), dtype=np.int64).reshape(-1, 2)
        ratio = RatioEstimate.from_samples(samples[:, 0], samples[:, 1], seed, {"pattern": pattern, "r": r, "mesh": mesh})
        row = ratio.to_row()
        row.update(
            alpha_r=ratio.numerator.mean,
            alpha_1=ratio.denominator.mean,
            expected=r ** -ARM_EXPONENTS[pattern] if pattern in ARM_EXPONENTS else float("nan"),
            change=abs(ratio.value - previous) if previous is not None else float("nan"),
        )
        previous = ratio.value
        rows.append(row)
        logger.info("ratio %s r=%g mesh=%g: %.4g +- %.2g", pattern, r, mesh, ratio.value, ratio.stderr)
    return rows


def square_vs_plain_ratio(thetas, mesh, n, seed, shift=(0.0, 0.0), workers=1):
    """Four Arms with Prescribed Sides Against Plain Four Arms, per Orientation

    The hole is the site nearest to shift; arms go to the boundary of the unit box
    B(shift, 1) turned by theta.

    Returns
    -------
    list of dict
    """
    site = nearest_site(shift, mesh)
    a = site.position(mesh)
    rows = []
    for theta in thetas:
        hole, outer = Box(a, mesh / 4.0, theta), Box(a, 1.0, theta)
        region = box_quad(outer, mesh).sites
        job = _HoleArmsPair(hole, outer, region, seed)
        samples = np.array(map_indices(job, range(n), workers), dtype=np.int64).reshape(-1, 2)
        ratio = RatioEstimate.from_samples(samples[:, 0], samples[:, 1], seed, {"theta": theta, "mesh": mesh})
        row = ratio.to_row()
        row.update(shift_x=a[0], shift_y=a[1], alpha_square=ratio.numerator.mean, alpha_plain=ratio.denominator.mean)
        rows.append(row)
        logger.info("square/plain theta=%g: %.4g +- %.2g", theta, ratio.value, ratio.stderr)
    return rows


@dataclass(frozen=True)
class _HoleArmsPair:
    hole: Box
    outer: Box
    region: object
    seed: int

    def __call__(self, index):
        config = sample(self.region, self.seed, index)
        return (
            int(hole_arms_event(config, self.hole, self.outer, True)),
            int(hole_arms_event(config, self.hole, self.outer, False)),
        )


# ---------------------------------------------------------------------------
# two-point function


@dataclass(frozen=True)
class _TwoPoint:
    x: tuple
    y: tuple
    arm: object
    region: object
    seed: int

    def __call__(self, index):
        config = sample(self.region, self.seed, index)
        return int(connected(config, self.x, self.y)), int(arm_event(config, self.arm, "O"))


def two_point_isotropy(d, angles, mesh, n, seed, workers=1, window=2.0):
    """Connection Frequency of Two Sites at Distance d, per Direction

    The sites are the nearest to -d/2 and d/2 along the direction; connections are
    looked for inside Box(window * d). The one-arm probability to distance d / 2 is
    read off the same configurations.

    Parameters
    ----------
    d : float
        Distance Between the Points
    angles : list of float
        Directions, Radians
    mesh : float
        Lattice Mesh
    n : int
        Samples per Direction
    seed : int
        Run Seed
    workers : int
        Worker Processes
    window : float
        Box Radius in Units of d

    Returns
    -------
    list of dict

    Raises
    ------
    ValueError
        If d Is Below Two Meshes
    """
    if d < 2.0 * mesh:
        raise ValueError("two-point distance must be at least two meshes")
    region = box_sites(Box((0.0, 0.0), window * d), mesh)
    arm = alpha_annulus(mesh, d / 2.0, mesh)
    rows = []
    for angle in angles:
        ux, uy = 0.5 * d * math.cos(angle), 0.5 * d * math.sin(angle)
        x, y = tuple(nearest_site((-ux, -uy), mesh)), tuple(nearest_site((ux, uy), mesh))
        job = _TwoPoint(x, y, arm, region, seed)
        samples = np.array(map_indices(job, range(n), workers), dtype=np.int64).reshape(-1, 2)
        p = Estimate.from_samples(samples[:, 0], seed)
        alpha = Estimate.from_samples(samples[:, 1], seed)
        normalized = p.mean / alpha.mean ** 2 if alpha.mean else float("nan")
        rows.append(
            {
                "d": d,
                "angle": angle,
                "mesh": mesh,
                "n": n,
                "seed": seed,
                "p": p.mean,
                "p_stderr": p.stderr,
                "alpha1": alpha.mean,
                "alpha1_stderr": alpha.stderr,
                "normalized": normalized,
                "total": p.total,
                "total_sq": p.total_sq,
            }
        )
        logger.info("two-point d=%g angle=%g: %.4g +- %.2g", d, angle, p.mean, p.stderr)
    return rows


# ---------------------------------------------------------------------------
# quasi-multiplicativity


@dataclass(frozen=True)
class _ThreeArms:
    annuli: tuple
    region: object
    pattern: str
    seed: int

    def __call__(self, index):
        config = sample(self.region, self.seed, index)
        return tuple(1 if annulus is None else int(arm_event(config, annulus, self.pattern)) for annulus in self.annuli)


def quasi_mult_check(pattern, r1, r2, r3, mesh, n, seed, workers=1):
    """Compares alpha(r1, r3) with alpha(r1, r2) alpha(r2, r3)

    The three events are read off one configuration of Box(r3). alpha(r, r) is 1.

    Returns
    -------
    dict
        The Three Estimates, Their Product Bound and the Constant c = alpha13 / product
    """
    if not 0 < r1 <= r2 < r3:
        raise ValueError("quasi-multiplicativity needs 0 < r1 <= r2 < r3")
    pattern = str(ArmPattern.parse(pattern))
    outer = alpha_annulus(r1, r3, mesh)
    inner = alpha_annulus(r1, r2, mesh) if r1 < r2 else None
    annuli = (inner, alpha_annulus(r2, r3, mesh), outer)
    region = annulus_layers(outer, mesh).full
    samples = np.array(
        map_indices(_ThreeArms(annuli, region, pattern, seed), range(n), workers), dtype=np.int64
    ).reshape(-1, 3)
    a12, a23, a13 = (Estimate.from_samples(samples[:, i], seed) for i in range(3))
    product = a12.mean * a23.mean
    product_stderr = math.hypot(a23.mean * a12.stderr, a12.mean * a23.stderr)
    slack = CONFIDENCE_Z * math.hypot(a13.stderr, product_stderr)
    if product > 0 and a13.mean > 0:
        c = a13.mean / product
        c_stderr = c * math.hypot(a13.stderr / a13.mean, product_stderr / product)
    else:
        c, c_stderr = float("nan"), float("nan")
    row = {
        "pattern": pattern,
        "r1": r1,
        "r2": r2,
        "r3": r3,
        "mesh": mesh,
        "n": n,
        "seed": seed,
        "alpha12": a12.mean,
        "alpha23": a23.mean,
        "alpha13": a13.mean,
        "alpha13_stderr": a13.stderr,
        "product": product,
        "product_stderr": product_stderr,
        "upper_bound_holds": bool(a13.mean <= product + slack),
        "c": c,
        "c_stderr": c_stderr,
    }
    logger.info("quasi-multiplicativity (%g, %g, %g): c = %.4g", r1, r2, r3, c)
    return row


# ---------------------------------------------------------------------------
# interface mass near the boundary


@dataclass(frozen=True)
class _BoundaryMass:
    box: Box
    quad: object
    deltas: tuple
    seed: int

    def __call__(self, index):
        trace = chordal_interface(sample(self.quad.sites, self.seed, index), self.quad)
        distance = self.box.boundary_distance(trace.edge_midpoints_xy)
        return tuple(int((distance <= delta).sum()) for delta in self.deltas) + (len(trace),)


def interface_boundary_decay(box, deltas, mesh, n, seed, workers=1):
    """Expected Chordal-Interface Mass Within delta of the Box Boundary

    Returns
    -------
    (list of dict, FitResult or None)
        One Row per delta, and the Fitted Exponent of the Mass in delta Over the
        Positive Points (None Below Three)
    """
    deltas = tuple(sorted(float(delta) for delta in deltas))
    if not deltas or deltas[0] <= 0:
        raise ValueError("boundary distances must be positive")
    quad = box_quad(box, mesh)
    job = _BoundaryMass(box, quad, deltas, seed)
    samples = np.array(map_indices(job, range(n), workers), dtype=np.int64).reshape(-1, len(deltas) + 1)
    total = Estimate.from_samples(samples[:, -1], seed)
    rows, points = [], []
    for i, delta in enumerate(deltas):
        estimate = Estimate.from_samples(samples[:, i], seed, {"delta": delta, "mesh": mesh})
        row = estimate.to_row()
        row.update(fraction=estimate.mean / total.mean if total.mean else float("nan"), total_mass=total.mean)
        rows.append(row)
        if estimate.mean > 0:
            points.append((delta, estimate))
    if len(points) < 3:
        logger.warning("boundary decay: %d positive points, no exponent fit", len(points))
        return rows, None
    fit = fit_exponent(points)
    logger.info("boundary decay exponent %.4g +- %.2g", fit.slope, fit.half_width)
    return rows, fit
