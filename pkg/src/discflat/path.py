"""Polyline paths: closest-point projection and constant-speed references."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReferenceTrajectory:
    positions: np.ndarray  # (N + 1, 2)
    velocities: np.ndarray  # (N + 1, 2)
    dt: float


class GeometricPath:
    """Straight segments joining consecutive waypoints."""

    def __init__(self, waypoints):
        pts = np.asarray(waypoints, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
            raise ValueError("path needs at least two 2-D waypoints")
        seg = np.diff(pts, axis=0)
        lengths = np.linalg.norm(seg, axis=1)
        if np.any(lengths == 0):
            raise ValueError("consecutive waypoints must be distinct")
        self.waypoints = pts
        self.lengths = lengths
        self.directions = seg / lengths[:, None]
        self.cumulative = np.concatenate([[0.0], np.cumsum(lengths)])

    @property
    def length(self) -> float:
        return float(self.cumulative[-1])

    def project(self, point):
        """Closest point on the path and its arc length.

        Ties go to the earliest segment.
        """
        q = np.asarray(point, dtype=float)
        rel = q - self.waypoints[:-1]
        s = np.clip(np.einsum("ij,ij->i", rel, self.directions), 0.0, self.lengths)
        foot = self.waypoints[:-1] + s[:, None] * self.directions
        dist = np.linalg.norm(q - foot, axis=1)
        i = int(np.argmin(dist))
        return foot[i], float(self.cumulative[i] + s[i])

    def distance(self, point) -> float:
        foot, _ = self.project(point)
        return float(np.linalg.norm(np.asarray(point, dtype=float) - foot))

    def _segment_at(self, s):
        return np.clip(np.searchsorted(self.cumulative, s, side="right") - 1, 0, len(self.lengths) - 1)

    def point_at(self, s):
        """Point at arc length ``s`` (clamped to the path ends)."""
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.length)
        i = self._segment_at(s)
        return self.waypoints[i] + (s - self.cumulative[i])[..., None] * self.directions[i]

    def direction_at(self, s):
        """Unit direction toward the next waypoint at arc length ``s``."""
        return self.directions[self._segment_at(np.asarray(s, dtype=float))]


def reference_generator(path: GeometricPath, current_output, speed: float, horizon: int, dt: float) -> ReferenceTrajectory:
    """Reference samples along the path starting at the closest point.

    Samples advance ``speed * dt`` in arc length per step, so the velocity
    direction switches at the step that passes a waypoint. Past the final
    waypoint the reference clamps there with zero velocity.
    """
    if speed <= 0:
        raise ValueError("desired speed must be positive")
    _, s0 = path.project(current_output)
    s = s0 + speed * dt * np.arange(horizon + 1)
    positions = path.point_at(s)
    velocities = speed * path.direction_at(s)
    velocities[s >= path.length] = 0.0
    return ReferenceTrajectory(positions, velocities, dt)


def fixed_reference(point, horizon: int, dt: float) -> ReferenceTrajectory:
    pos = np.tile(np.asarray(point, dtype=float), (horizon + 1, 1))
    return ReferenceTrajectory(pos, np.zeros_like(pos), dt)
