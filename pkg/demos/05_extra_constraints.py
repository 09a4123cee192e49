"""Stacking feasibility limits beyond the arrival deadline.

Any accumulated per-edge quantity can cap a route: total length, hop
count, toll spend.  Each limit is a pure feasibility check during the
search, so adding more does not change its character.
"""

from wayscore import (
    ArrivalProfile,
    Constraint,
    Edge,
    Query,
    ScoreProfile,
    build_network,
    solve,
)

A, B, C = 0, 1, 2
edges = [
    Edge(A, B, ArrivalProfile([(0, 2)]), ScoreProfile.constant(5), length_m=400.0),
    Edge(A, C, ArrivalProfile([(0, 3)]), ScoreProfile.constant(0), length_m=700.0),
    Edge(C, A, ArrivalProfile([(3, 4)]), ScoreProfile.constant(4), length_m=250.0),
    Edge(C, B, ArrivalProfile([(3, 5)]), ScoreProfile.constant(7), length_m=600.0),
]
net = build_network(3, edges, labels={A: "A", B: "B", C: "C"})
query = Query.from_budget(A, B, t_dep=0.0, budget=8.0)

meters = Constraint(cost=lambda edge, t: edge.length_m, budget=2000.0)
hops = Constraint(cost=lambda edge, t: 1.0, budget=3.0)

scenarios = [
    ("time budget only", []),
    ("max 2000 m, max 3 hops", [meters, hops]),
    ("max 1000 m", [Constraint(cost=lambda edge, t: edge.length_m, budget=1000.0)]),
    ("max 1 hop and max 300 m", [hops, Constraint(lambda e, t: e.length_m, 300.0)]),
]
for name, constraints in scenarios:
    res = solve(net, query, constraints=constraints)
    if res.path is None:
        print(f"{name:28s} -> {res.status}")
        continue
    route = " -> ".join(net.node_name(n) for n in res.path.nodes)
    length = sum(
        net.edges[net.edge_between(u, v)].length_m
        for u, v in zip(res.path.nodes, res.path.nodes[1:])
    )
    print(f"{name:28s} -> {route}  (score {res.path.score:.0f}, {length:.0f} m)")
