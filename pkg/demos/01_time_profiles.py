"""Edge time profiles: how arrival and score functions behave.

An edge's travel behaviour over the day is a piecewise-linear arrival
function (departure time -> arrival time) plus a piecewise-constant score
function (departure time -> reward for entering the edge then).
"""

from wayscore import ArrivalProfile, ScoreProfile

# Breakpoints (departure, arrival): travel time is 2 min at t=0 and
# 4 min at t=4, varying linearly in between and constant outside.
f = ArrivalProfile([(0.0, 2.0), (4.0, 8.0)])

print("departure -> arrival (travel time)")
for dt in (0.0, 1.0, 2.0, 3.0, 4.0, 10.0):
    arr = f.arrival(dt)
    print(f"  {dt:5.1f}  -> {arr:5.1f}   ({arr - dt:.1f} min)")

# The inverse question: how late can I leave and still arrive by T?
print("\ndeadline -> latest departure")
for deadline in (2.0, 5.0, 8.0, 12.0):
    dep = f.latest_departure(deadline)
    print(f"  {deadline:5.1f}  -> {dep}")

# Flat stretches have a well-defined answer too: the right endpoint.
flat = ArrivalProfile([(0.0, 5.0), (3.0, 5.0)])
print(f"\nflat profile, deadline 5.0 -> latest departure {flat.latest_departure(5.0)}")

# Score functions are step functions over half-open intervals.
g = ScoreProfile(boundaries=(0.0, 10.0, 20.0), values=(5.0, 7.0), default=0.0)
print("\ndeparture -> score ([0,10): 5, [10,20): 7, else 0)")
for dt in (3.0, 10.0, 19.999, 25.0):
    print(f"  {dt:7.3f} -> {g.value(dt):.0f}")
