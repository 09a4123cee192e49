"""Time-of-day edge profiles: arrival-time and score functions.

An edge's travel behaviour is captured by two functions of the departure
time (minutes since midnight, real-valued):

* :class:`ArrivalProfile` -- piecewise-linear, non-decreasing map from
  departure time to arrival time.  Non-decreasing arrivals are exactly the
  FIFO property: leaving later never gets you there earlier.
* :class:`ScoreProfile` -- piecewise-constant map from departure time to a
  non-negative score.

Both are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional, Sequence

# Absolute tolerance for time comparisons, in minutes.  Interpolation
# round-off is orders of magnitude below this.
TIME_EPS = 1e-9


class ProfileError(ValueError):
    """Raised for structurally invalid profile data."""


@dataclass(frozen=True)
class FifoViolation:
    """First offending breakpoint pair of a non-FIFO arrival profile."""

    index: int
    kind: str  # "arrival-decrease" | "departure-order" | "negative-travel"
    departure: float
    arrival: float

    def message(self) -> str:
        return (
            f"{self.kind} at breakpoint {self.index}: "
            f"departure={self.departure!r}, arrival={self.arrival!r}"
        )


def check_fifo(pairs: Sequence[tuple[float, float]]) -> Optional[FifoViolation]:
    """Validate a breakpoint list; return the first violation or None.

    Valid means: departures strictly increasing, arrivals non-decreasing,
    and every arrival >= its departure.
    """
    if not pairs:
        raise ProfileError("arrival profile needs at least one breakpoint")
    prev_x, prev_y = None, None
    for i, (x, y) in enumerate(pairs):
        if y < x:
            return FifoViolation(i, "negative-travel", x, y)
        if prev_x is not None:
            if x <= prev_x:
                return FifoViolation(i, "departure-order", x, y)
            if y < prev_y:
                return FifoViolation(i, "arrival-decrease", x, y)
        prev_x, prev_y = x, y
    return None


class ArrivalProfile:
    """Piecewise-linear departure-to-arrival map for one edge.

    Between breakpoints the arrival time is linearly interpolated.  Outside
    the breakpoint range the travel time of the nearest breakpoint is held
    constant, so a single breakpoint encodes a static edge.
    """

    __slots__ = ("xs", "ys")

    def __init__(self, pairs: Sequence[tuple[float, float]]):
        violation = check_fifo(pairs)
        if violation is not None:
            raise ProfileError(violation.message())
        self.xs = tuple(float(x) for x, _ in pairs)
        self.ys = tuple(float(y) for _, y in pairs)

    @classmethod
    def constant(cls, travel_time: float, anchor: float = 0.0) -> "ArrivalProfile":
        """Static edge with the given travel time in minutes."""
        return cls([(anchor, anchor + travel_time)])

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.xs, self.ys))

    def arrival(self, departure: float) -> float:
        """Arrival time for a departure at the edge's tail."""
        xs, ys = self.xs, self.ys
        if departure <= xs[0]:
            return departure + (ys[0] - xs[0])
        if departure >= xs[-1]:
            return departure + (ys[-1] - xs[-1])
        i = bisect_right(xs, departure) - 1
        x1, x2 = xs[i], xs[i + 1]
        y1, y2 = ys[i], ys[i + 1]
        dy, dx = y2 - y1, x2 - x1
        if dy == dx:
            # Constant travel time on this segment; skipping the
            # interpolation keeps the result exact.
            return departure + (y1 - x1)
        return dy * (departure - x1) / dx + y1

    def latest_departure(self, arrival_by: float) -> Optional[float]:
        """Latest non-negative departure whose arrival is <= ``arrival_by``.

        Returns None when even departing at time 0 arrives too late.  On a
        flat (constant-arrival) stretch the right endpoint is returned: it
        is the latest departure that still makes the deadline.
        """
        xs, ys = self.xs, self.ys
        if arrival_by >= ys[-1]:
            dep = arrival_by - (ys[-1] - xs[-1])
        elif arrival_by < ys[0]:
            dep = arrival_by - (ys[0] - xs[0])
        else:
            # Rightmost breakpoint with arrival <= target; the segment to
            # its right is strictly increasing in arrival, so the inverse
            # interpolation is well defined.
            i = bisect_right(ys, arrival_by) - 1
            x1, x2 = xs[i], xs[i + 1]
            y1, y2 = ys[i], ys[i + 1]
            dep = (x2 - x1) * (arrival_by - y1) / (y2 - y1) + x1
            # On extremely steep segments a half-ulp of rounding in dep can
            # overshoot the deadline by a lot; walk back to feasibility.
            # The left breakpoint satisfies it exactly, so this terminates.
            for _ in range(16):
                if dep <= x1 or self.arrival(dep) <= arrival_by:
                    break
                dep = math.nextafter(dep, x1)
            else:
                dep = x1
        if dep < 0.0:
            return None
        return dep

    def min_travel_time(self) -> float:
        return min(y - x for x, y in zip(self.xs, self.ys))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ArrivalProfile)
            and self.xs == other.xs
            and self.ys == other.ys
        )

    def __hash__(self) -> int:
        return hash((self.xs, self.ys))

    def __repr__(self) -> str:
        return f"ArrivalProfile({self.pairs()!r})"


class ScoreProfile:
    """Piecewise-constant departure-to-score map for one edge.

    ``values[i]`` applies on the half-open interval
    ``[boundaries[i], boundaries[i+1])``; ``default`` applies before the
    first boundary and from the last boundary onward.
    """

    __slots__ = ("boundaries", "values", "default")

    def __init__(
        self,
        boundaries: Sequence[float] = (),
        values: Sequence[float] = (),
        default: float = 0.0,
    ):
        bounds = tuple(float(b) for b in boundaries)
        vals = tuple(float(v) for v in values)
        if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
            raise ProfileError("score boundaries must be strictly increasing")
        expected = max(len(bounds) - 1, 0)
        if len(vals) != expected:
            raise ProfileError(
                f"expected {expected} score values for {len(bounds)} boundaries, "
                f"got {len(vals)}"
            )
        if default < 0.0 or any(v < 0.0 for v in vals):
            raise ProfileError("scores must be non-negative")
        self.boundaries = bounds
        self.values = vals
        self.default = float(default)

    @classmethod
    def constant(cls, score: float) -> "ScoreProfile":
        return cls((), (), score)

    def value(self, departure: float) -> float:
        """Score earned for entering the edge at ``departure``."""
        bounds = self.boundaries
        if not bounds or departure < bounds[0] or departure >= bounds[-1]:
            return self.default
        return self.values[bisect_right(bounds, departure) - 1]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ScoreProfile)
            and self.boundaries == other.boundaries
            and self.values == other.values
            and self.default == other.default
        )

    def __hash__(self) -> int:
        return hash((self.boundaries, self.values, self.default))

    def __repr__(self) -> str:
        return (
            f"ScoreProfile(boundaries={self.boundaries!r}, "
            f"values={self.values!r}, default={self.default!r})"
        )
