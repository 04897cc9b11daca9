"""Streaming weighted Birkhoff sums sum_i w_i S_n(g)(p_i), block by block."""
from __future__ import annotations

import cmath
import math

import numpy as np

from .. import kernels
from ..arith import step_phases_dd
from ..torus import blocks


class SumStream:
    """Yields A_n = sum_i w_i S_n(g)(p_i) for n = 0, 1, 2, ... in consecutive chunks.

    Each (point, half-mode) pair is one phase trajectory.  Points sharing the
    same x (to the last bit) differ only by a constant phase b * (y_i - y_0),
    so their trajectories are merged into one with a combined weight.
    """

    def __init__(self, g, params, weighted_points):
        self.g = g
        self.params = params
        amodes, bmodes, coefs, c0 = g.half_spectrum
        self.c0_total = c0 * sum(w for _, w in weighted_points)
        groups = {}
        for p, w in weighted_points:
            groups.setdefault((p.x.hi, p.x.lo), []).append((p, w))
        self.traj = []  # (a, b, point, complex weight)
        for members in groups.values():
            ref = members[0][0]
            for a, b, c in zip(amodes.tolist(), bmodes.tolist(), coefs.tolist()):
                weight = 0j
                for p, w in members:
                    dy = float((p.y - ref.y).frac())
                    weight += w * cmath.exp(2j * math.pi * ((b * dy) % 1.0))
                weight *= 2.0 * c
                if weight != 0:
                    self.traj.append((a, b, ref, weight))
        self.weights = np.array([t[3] for t in self.traj], dtype=np.complex128)
        self.pos = 0
        self.value = 0.0  # A_pos

    def take(self, count, level=math.inf, near=-1.0):
        """A_n for n in [pos, pos + count); advances pos.

        Also records in ``first_cross`` / ``first_near`` the first offset with
        |A_n| > level, resp. min |A_n -+ level| <= near (-1 when absent).
        """
        out = np.empty(count)
        out[0] = self.value
        self.first_cross = 0 if abs(self.value) > level else -1
        self.first_near = 0 if min(abs(self.value - level), abs(self.value + level)) <= near else -1
        filled = 1
        carry = self.value
        # increments k in [pos, pos + count - 1) give A_{pos+1} .. A_{pos+count-1}
        for start, length in blocks(self.pos, count - 1):
            run, fc, fn = self._block(start, length, carry, level, near)
            out[filled:filled + length] = run
            if self.first_cross < 0 and fc >= 0:
                self.first_cross = filled + fc
            if self.first_near < 0 and fn >= 0:
                self.first_near = filled + fn
            filled += length
            carry = float(run[-1])
        # one more increment carries A_{pos+count} forward
        self.value = float(self._block(self.pos + count - 1, 1, carry)[0][0])
        self.pos += count
        return out

    def _block(self, start, length, carry, level=math.inf, near=-1.0):
        """carry + running sums of the real increments for k in [start, start + length)."""
        if self.c0_total or not self.traj:
            # detection after adding the linear term happens in numpy
            if not self.traj:
                run = np.full(length, carry)
            else:
                run, _, _ = kernels.drift_series(*self._anchors(start), self.weights, length,
                                                 carry)
            run += self.c0_total * np.arange(1, length + 1, dtype=np.float64)
            fc = np.flatnonzero(np.abs(run) > level) if level < math.inf else ()
            fn = (np.flatnonzero(np.minimum(np.abs(run - level), np.abs(run + level)) <= near)
                  if near >= 0 else ())
            return run, (int(fc[0]) if len(fc) else -1), (int(fn[0]) if len(fn) else -1)
        return kernels.drift_series(*self._anchors(start), self.weights, length, carry,
                                    level=level, near=near)

    def _anchors(self, start):
        arrs = np.empty((6, len(self.traj)))
        for i, (a, b, p, _) in enumerate(self.traj):
            (th, tl), (dh, dl), (ch, cl) = step_phases_dd(a, b, start, self.params.alpha,
                                                          p.x, p.y, self.params.beta)
            arrs[:, i] = (th, tl, dh, dl, ch, cl)
        return arrs
