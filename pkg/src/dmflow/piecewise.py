"""Exact piecewise-linear function algebra on a closed interval.

A function is stored as breakpoints x_0 < ... < x_m with values y_i and
linear interpolation in between.  Composition inserts the preimages of the
outer function's breakpoints, so composites stay exactly piecewise linear;
fixed points are then enumerated segment by segment, including whole
intervals where a composite coincides with the identity.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from .errors import DomainError

__all__ = ["PiecewiseLinear"]

_MERGE_TOL = 1e-13       # relative spacing below which breakpoints merge
_IDENTITY_TOL = 1e-12    # |f(x) - x| treated as exact coincidence


@dataclass(frozen=True)
class PiecewiseLinear:
    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise DomainError("need matching xs/ys with at least two points")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise DomainError("breakpoints must be strictly increasing")

    @property
    def domain(self) -> tuple[float, float]:
        return self.xs[0], self.xs[-1]

    def __call__(self, x: float) -> float:
        lo, hi = self.domain
        if not lo <= x <= hi:
            raise DomainError(f"{x} outside domain [{lo}, {hi}]")
        i = bisect.bisect_right(self.xs, x) - 1
        if i >= len(self.xs) - 1:
            return self.ys[-1]
        x0, x1 = self.xs[i], self.xs[i + 1]
        y0, y1 = self.ys[i], self.ys[i + 1]
        if x == x0:
            return y0
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def compose(self, inner: "PiecewiseLinear") -> "PiecewiseLinear":
        """self o inner, exact: breakpoints are inner's plus the preimages
        of self's breakpoints under each linear piece of inner."""
        cuts = list(inner.xs)
        for i in range(len(inner.xs) - 1):
            x0, x1 = inner.xs[i], inner.xs[i + 1]
            y0, y1 = inner.ys[i], inner.ys[i + 1]
            if y0 == y1:
                continue
            for z in self.xs:
                if min(y0, y1) < z < max(y0, y1):
                    cuts.append(x0 + (z - y0) * (x1 - x0) / (y1 - y0))
        cuts.sort()
        span = cuts[-1] - cuts[0]
        merged = [cuts[0]]
        for x in cuts[1:]:
            if x - merged[-1] > _MERGE_TOL * max(span, 1.0):
                merged.append(x)
        merged[-1] = inner.xs[-1]
        return PiecewiseLinear(tuple(merged),
                               tuple(self(inner(x)) for x in merged))

    def iterate(self, n: int) -> "PiecewiseLinear":
        """n-fold self-composition (requires range within domain)."""
        if n < 1:
            raise DomainError("n must be >= 1")
        out = self
        for _ in range(n - 1):
            out = out.compose(self)
        return out

    def fixed_points(self) -> tuple[list[float], list[tuple[float, float]]]:
        """Roots of f(x) = x: isolated points plus identity intervals.

        Segments whose endpoint residuals f(x)-x both vanish (within a
        rounding tolerance) are reported as intervals; isolated roots are
        solved exactly per segment and deduplicated.
        """
        points: list[float] = []
        intervals: list[tuple[float, float]] = []
        res = [y - x for x, y in zip(self.xs, self.ys)]
        for i in range(len(self.xs) - 1):
            r0, r1 = res[i], res[i + 1]
            x0, x1 = self.xs[i], self.xs[i + 1]
            near0 = abs(r0) <= _IDENTITY_TOL
            near1 = abs(r1) <= _IDENTITY_TOL
            if near0 and near1:
                intervals.append((x0, x1))
                continue
            if near0:
                points.append(x0)
            if near1:
                points.append(x1)
            if not near0 and not near1 and (r0 > 0) != (r1 > 0):
                points.append(x0 + r0 * (x1 - x0) / (r0 - r1))
        # Merge touching intervals, drop points inside intervals, dedupe.
        merged_iv: list[tuple[float, float]] = []
        for iv in sorted(intervals):
            if merged_iv and iv[0] <= merged_iv[-1][1] + _IDENTITY_TOL:
                merged_iv[-1] = (merged_iv[-1][0], max(merged_iv[-1][1], iv[1]))
            else:
                merged_iv.append(iv)
        span = max(self.xs[-1] - self.xs[0], 1.0)
        uniq: list[float] = []
        for p in sorted(points):
            if any(a - 1e-9 <= p <= b + 1e-9 for a, b in merged_iv):
                continue
            if not uniq or p - uniq[-1] > 1e-9 * span:
                uniq.append(p)
        return uniq, merged_iv
