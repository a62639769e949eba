"""Monte-Carlo estimation of the effective volume dimension of a domain.

The largest volume of the domain intersected with a ball of radius r grows
like r^s for some exponent s between 0 (bounded domains) and the ambient
dimension; s counts the orthogonal directions extending independently to
infinity and enters the sharp diffusion-vs-attraction existence threshold.
The estimator samples uniformly inside balls around caller-chosen probe
centres and fits the growth exponent on a log-log scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class DomainSpec:
    """A domain given by its indicator plus probe points known to lie inside.

    indicator maps an (n, dim) array of points to a boolean array.
    bounding_halfwidth is optional metadata (radius -> box halfwidth
    containing every probe-centred ball intersection) for samplers that
    prefer box sampling over ball sampling.
    """

    dim: int
    indicator: Callable[[np.ndarray], np.ndarray]
    probe_centers: np.ndarray
    bounding_halfwidth: Callable[[float], float] | None = None

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.probe_centers, dtype=float))
        if centers.shape[1] != self.dim:
            raise ValueError(
                f"probe centers have dimension {centers.shape[1]}, domain has {self.dim}"
            )
        object.__setattr__(self, "probe_centers", centers)
        inside = np.asarray(self.indicator(centers), dtype=bool)
        if not inside.all():
            bad = centers[~inside][0]
            raise ValueError(f"probe center {bad!r} is not inside the domain")


@dataclass(frozen=True)
class VolumeProfile:
    """Estimated intersected volumes over a set of radii."""

    radii: np.ndarray
    volumes: np.ndarray
    stderr: np.ndarray


def ball_volume(radius: float, dim: int) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * radius**dim


def _sample_in_ball(rng: np.random.Generator, center: np.ndarray, radius: float, n: int) -> np.ndarray:
    dim = center.size
    directions = rng.standard_normal((n, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(n) ** (1.0 / dim)
    return center[None, :] + radii[:, None] * directions


def estimate_volume_profile(
    spec: DomainSpec,
    radii: Sequence[float],
    samples_per_radius: int,
    seed: int = 0,
) -> VolumeProfile:
    """Estimate the largest ball-intersected volume at each radius.

    For every radius and probe centre, the intersected volume is the hit
    fraction of uniform samples in the ball times the ball volume; the
    profile keeps the maximum over probes.  Standard errors come from the
    binomial variance of the hit fraction.  Sampling is deterministic per
    seed, with independent streams per (radius, probe) task.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    if samples_per_radius < 10_000:
        raise ValueError(
            f"need at least 10^4 samples per radius, got {samples_per_radius}"
        )
    n_probes = spec.probe_centers.shape[0]
    streams = np.random.SeedSequence(seed).spawn(radii.size * n_probes)
    volumes = np.empty(radii.size)
    stderr = np.empty(radii.size)
    for i, r in enumerate(radii):
        best_vol = -math.inf
        best_err = math.nan
        vball = ball_volume(float(r), spec.dim)
        for j in range(n_probes):
            rng = np.random.default_rng(streams[i * n_probes + j])
            points = _sample_in_ball(rng, spec.probe_centers[j], float(r), samples_per_radius)
            frac = float(np.asarray(spec.indicator(points), dtype=bool).mean())
            vol = frac * vball
            err = vball * math.sqrt(frac * (1 - frac) / samples_per_radius)
            if vol > best_vol:
                best_vol, best_err = vol, err
        volumes[i] = best_vol
        stderr[i] = best_err
    return VolumeProfile(radii=radii, volumes=volumes, stderr=stderr)


def estimate_effective_dimension(profile: VolumeProfile) -> float:
    """Least-squares slope of log V against log r over the largest decade of
    radii: the finite surrogate of the asymptotic growth exponent."""
    radii = profile.radii
    if radii.size < 3 or radii[-1] / radii[0] < 10:
        raise ValueError("need at least 3 radii spanning at least one decade")
    window = radii >= radii[-1] / 10 * (1 - 1e-12)
    if window.sum() < 2:
        window = np.ones_like(window, dtype=bool)
    vols = profile.volumes[window]
    if np.any(vols <= 0):
        raise ValueError("degenerate volume profile: zero estimated volume in window")
    slope = np.polyfit(np.log(radii[window]), np.log(vols), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# Built-in domain constructors
# ---------------------------------------------------------------------------


def box_domain(side_lengths: Sequence[float]) -> DomainSpec:
    """Axis-aligned box centred at the origin."""
    sides = np.asarray(side_lengths, dtype=float)
    half = sides / 2

    def indicator(points: np.ndarray) -> np.ndarray:
        return np.all(np.abs(points) <= half[None, :], axis=1)

    return DomainSpec(
        dim=sides.size,
        indicator=indicator,
        probe_centers=np.zeros((1, sides.size)),
        bounding_halfwidth=lambda r: float(half.max()),
    )


def ball_domain(radius: float, dim: int) -> DomainSpec:
    def indicator(points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points, axis=1) <= radius

    return DomainSpec(
        dim=dim,
        indicator=indicator,
        probe_centers=np.zeros((1, dim)),
        bounding_halfwidth=lambda r: float(radius),
    )


def half_space_domain(dim: int, axis: int = -1) -> DomainSpec:
    """Points with nonnegative coordinate along the given axis."""

    def indicator(points: np.ndarray) -> np.ndarray:
        return points[:, axis] >= 0

    return DomainSpec(dim=dim, indicator=indicator, probe_centers=np.zeros((1, dim)))


def slab_domain(side_lengths: Sequence[float], free_dims: int) -> DomainSpec:
    """Product of a centred box with free Euclidean directions: F x R^k."""
    sides = np.asarray(side_lengths, dtype=float)
    half = sides / 2
    m = sides.size
    dim = m + free_dims

    def indicator(points: np.ndarray) -> np.ndarray:
        return np.all(np.abs(points[:, :m]) <= half[None, :], axis=1)

    return DomainSpec(dim=dim, indicator=indicator, probe_centers=np.zeros((1, dim)))


def wedge_domain(angle: float, probe_distance: float = 1.0) -> DomainSpec:
    """Planar wedge 0 <= y <= tan(angle) * x for an opening angle in (0, pi/2)."""
    if not 0 < angle < math.pi / 2:
        raise ValueError(f"wedge angle must lie in (0, pi/2), got {angle}")
    slope = math.tan(angle)

    def indicator(points: np.ndarray) -> np.ndarray:
        x, y = points[:, 0], points[:, 1]
        return (x >= 0) & (y >= 0) & (y <= slope * x)

    probe = np.array([[probe_distance, slope * probe_distance / 2]])
    return DomainSpec(dim=2, indicator=indicator, probe_centers=probe)


def paraboloid_domain(dim: int, probe_height: float = 1.0) -> DomainSpec:
    """Region above the paraboloid: last coordinate at least |rest|^2."""

    def indicator(points: np.ndarray) -> np.ndarray:
        return points[:, -1] >= np.sum(points[:, :-1] ** 2, axis=1)

    probe = np.zeros((1, dim))
    probe[0, -1] = probe_height
    return DomainSpec(dim=dim, indicator=indicator, probe_centers=probe)
