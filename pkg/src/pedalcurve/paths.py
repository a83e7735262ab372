"""Polar sample paths shared by the reconstruction and orbit code."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import EmptyPath


@dataclass
class PolarPath:
    """Ordered polar samples (r, phi) of a curve about the pedal point.

    ``branch_marks`` are indices of apsides (where dr/dphi changes sign).
    ``p`` optionally carries the distance to the tangent at each sample when it
    is known analytically.
    """

    r: np.ndarray
    phi: np.ndarray
    branch_marks: List[int] = field(default_factory=list)
    closed: bool = False
    p: Optional[np.ndarray] = None

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.r.size == 0:
            raise EmptyPath("path has no samples")
        if self.r.shape != self.phi.shape:
            raise ValueError("r and phi must have equal length")

    def __len__(self):
        return self.r.size

    @property
    def x(self):
        return self.r * np.cos(self.phi)

    @property
    def y(self):
        return self.r * np.sin(self.phi)

    def xy(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def branches(self) -> List[slice]:
        cuts = [0] + [m for m in self.branch_marks if 0 < m < len(self)] + [len(self) - 1]
        return [slice(a, b + 1) for a, b in zip(cuts, cuts[1:]) if b > a] or [slice(0, len(self))]

    def as_sampler(self):
        """Quintic spline (x(s), y(s)) in cumulative chord length s.

        Chord length stays well scaled where r changes fast against phi (near
        the origin or far out), unlike phi itself. Returns (spline, s_min, s_max);
        call ``.derivative()`` for tangents.
        """
        pts = self.xy()
        # drop clustered samples (apsis grids bunch up at segment ends); very
        # uneven knots make a quintic spline ring
        step = np.hypot(*np.diff(pts, axis=0).T)
        floor = 0.2 * float(np.median(step[step > 0])) if np.any(step > 0) else 0.0
        keep = [0]
        for i in range(1, len(pts) - 1):
            if np.hypot(*(pts[i] - pts[keep[-1]])) >= floor:
                keep.append(i)
        if len(pts) > 1:
            if np.hypot(*(pts[-1] - pts[keep[-1]])) < floor and len(keep) > 1:
                keep[-1] = len(pts) - 1
            else:
                keep.append(len(pts) - 1)
        pts = pts[keep]
        s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
        spline = make_interp_spline(s, pts, k=5)
        return spline, float(s[0]), float(s[-1])

    def to_dict(self):
        return {
            "r": self.r.tolist(),
            "phi": self.phi.tolist(),
            "branch_marks": list(map(int, self.branch_marks)),
            "closed": bool(self.closed),
        }
