import pytest

from wayscore.network import Edge, build_network
from wayscore.profiles import ArrivalProfile, ScoreProfile


@pytest.fixture
def toy_network():
    """Three-node network behind the worked routing example.

    A=0, B=1, C=2.  Time-series semantics: A->B departs 0 arrives 2
    (score 5), A->C departs 0 arrives 3 (score 0), C->A departs 3
    arrives 4 (score 4), C->B departs 3 arrives 5 (score 7).
    """
    edges = [
        Edge(0, 1, ArrivalProfile([(0.0, 2.0)]), ScoreProfile.constant(5.0)),
        Edge(0, 2, ArrivalProfile([(0.0, 3.0)]), ScoreProfile.constant(0.0)),
        Edge(2, 0, ArrivalProfile([(3.0, 4.0)]), ScoreProfile.constant(4.0)),
        Edge(2, 1, ArrivalProfile([(3.0, 5.0)]), ScoreProfile.constant(7.0)),
    ]
    return build_network(3, edges, labels={0: "A", 1: "B", 2: "C"})


@pytest.fixture
def dominance_trap_network():
    """Four-node instance where dominance pruning forfeits the optimum.

    A=0, B=1, C=2, D=3, static (travel time, score) per edge:
    A->B (1,2), B->C (2,2), A->C (4,3), C->B (1,2), B->D (1,2), C->D (3,2).
    Two labels reach C: (3,4) via B and (4,3) direct.  The (4,3) label
    looks dominated, yet only it may still visit B, reaching D at (6,7);
    the (3,4) label must go straight to D for (6,6).
    """

    def edge(u, v, tt, score):
        return Edge(u, v, ArrivalProfile.constant(tt), ScoreProfile.constant(score))

    edges = [
        edge(0, 1, 1.0, 2.0),
        edge(1, 2, 2.0, 2.0),
        edge(0, 2, 4.0, 3.0),
        edge(2, 1, 1.0, 2.0),
        edge(1, 3, 1.0, 2.0),
        edge(2, 3, 3.0, 2.0),
    ]
    return build_network(4, edges, labels={0: "A", 1: "B", 2: "C", 3: "D"})


@pytest.fixture
def chain_network():
    """A->B->C->D chain with unit travel times (latest-departure example)."""
    edges = [
        Edge(0, 1, ArrivalProfile.constant(1.0), ScoreProfile.constant(0.0)),
        Edge(1, 2, ArrivalProfile.constant(1.0), ScoreProfile.constant(0.0)),
        Edge(2, 3, ArrivalProfile.constant(1.0), ScoreProfile.constant(0.0)),
    ]
    return build_network(4, edges, labels={0: "A", 1: "B", 2: "C", 3: "D"})
