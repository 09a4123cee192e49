import csv
import io
import json

import pytest

from wayscore.bench import BENCH_CSV_FIELDS, run_bench, write_bench_csv
from wayscore.cli import main
from wayscore.datagen import GenConfig, generate_network, generate_query_sets, write_queries_csv
from wayscore.network import load_network, save_network


@pytest.fixture(scope="module")
def grid_files(tmp_path_factory):
    """A generated network file plus a small query CSV next to it."""
    root = tmp_path_factory.mktemp("bench")
    gen = generate_network(GenConfig(rows=6, cols=6, score_density=0.3, seed=13))
    graph_path = str(root / "grid.json")
    save_network(gen.network, graph_path)
    records = generate_query_sets(
        gen.network, seed=3, count_per_set=4, buckets=((0.0, 3.0), (3.0, 6.0))
    )
    queries_path = str(root / "queries.csv")
    write_queries_csv(records, queries_path)
    return graph_path, queries_path, gen.network, records


@pytest.fixture
def toy_file(toy_network, tmp_path):
    path = str(tmp_path / "toy.json")
    save_network(toy_network, path)
    return path


class TestGenNetworkCommand:
    def test_writes_loadable_validated_file(self, tmp_path, capsys):
        out = str(tmp_path / "g.json")
        rc = main(["gen-network", "--grid", "5x4", "--density", "0.2",
                   "--seed", "7", "--out", out])
        assert rc == 0
        net = load_network(out)  # load fully re-validates
        assert net.node_count == 20
        assert "wrote" in capsys.readouterr().out

    def test_bad_density_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["gen-network", "--density", "1.5", "--out", str(tmp_path / "x")])
        assert exc.value.code == 1

    def test_same_flags_same_bytes(self, tmp_path):
        a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        for out in (a, b):
            assert main(["gen-network", "--grid", "4x4", "--seed", "3",
                         "--out", out]) == 0
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_base_topology_reuse(self, tmp_path, capsys):
        base = str(tmp_path / "base.json")
        redressed = str(tmp_path / "re.json")
        assert main(["gen-network", "--grid", "4x5", "--seed", "3",
                     "--out", base]) == 0
        assert main(["gen-network", "--base", base, "--seed", "9",
                     "--density", "0.5", "--out", redressed]) == 0
        a, b = load_network(base), load_network(redressed)
        assert b.node_count == a.node_count
        assert [(e.tail, e.head) for e in b.edges] == [
            (e.tail, e.head) for e in a.edges
        ]
        # same roads, fresh traffic
        assert any(x.arrival != y.arrival for x, y in zip(a.edges, b.edges))


class TestQueryCommand:
    def test_worked_example_by_node_name(self, toy_file, capsys):
        rc = main(["query", "--graph", toy_file, "--from", "A", "--to", "B",
                   "--depart", "0", "--budget", "8"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["nodes"] == ["A", "C", "B"]
        assert doc["score"] == 7.0

    def test_percent_overhead_budget_printed(self, toy_file, capsys):
        rc = main(["query", "--graph", toy_file, "--from", "A", "--to", "B",
                   "--depart", "0", "--overhead-pct", "30"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["budget"] == pytest.approx(2.0 * 1.3)

    def test_unknown_node_is_usage_error(self, toy_file, capsys):
        rc = main(["query", "--graph", toy_file, "--from", "ZZZ", "--to", "B",
                   "--depart", "0", "--budget", "8"])
        assert rc == 1
        assert "unknown node" in capsys.readouterr().err

    def test_infeasible_prints_infeasible(self, toy_file, capsys):
        rc = main(["query", "--graph", toy_file, "--from", "B", "--to", "A",
                   "--depart", "0", "--budget", "8"])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "infeasible"

    def test_missing_graph_is_data_error(self, capsys):
        rc = main(["query", "--graph", "/nonexistent.json", "--from", "0",
                   "--to", "1", "--depart", "0", "--budget", "1"])
        assert rc == 2

    def test_conflicting_overheads_usage_error(self, toy_file):
        with pytest.raises(SystemExit) as exc:
            main(["query", "--graph", toy_file, "--from", "A", "--to", "B",
                  "--depart", "0", "--budget", "8", "--overhead-pct", "30"])
        assert exc.value.code == 1


class TestBenchCommand:
    def test_csv_schema_and_thread_sweep(self, grid_files, capsys):
        graph_path, queries_path, _, _ = grid_files
        rc = main(["bench", "--graph", graph_path, "--queries", queries_path,
                   "--threads", "1,4"])
        assert rc == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert tuple(rows[0].keys()) == BENCH_CSV_FIELDS
        # two thread counts x two sets, scores identical across threads
        assert len(rows) == 4
        for set_tag in ("set-1", "set-2"):
            scores = {r["avg_score"] for r in rows if r["set"] == set_tag}
            assert len(scores) == 1

    def test_pruning_off_same_scores_more_work(self):
        # unpruned search enumerates every loopless path, so keep the
        # network tiny; the equality is what matters
        gen = generate_network(GenConfig(rows=3, cols=3, score_density=0.3, seed=2))
        records = generate_query_sets(
            gen.network, seed=4, count_per_set=3, buckets=((0.0, 2.0), (2.0, 4.0))
        )
        on = run_bench(gen.network, records, threads_list=[1], pruning=True)
        off = run_bench(gen.network, records, threads_list=[1], pruning=False)
        for row_on, row_off in zip(on, off):
            assert row_on.avg_score == row_off.avg_score
            assert row_on.explored_mean <= row_off.explored_mean
        assert any(a.explored_mean < b.explored_mean for a, b in zip(on, off))

    def test_output_file(self, grid_files, tmp_path):
        graph_path, queries_path, _, _ = grid_files
        out = str(tmp_path / "report.csv")
        rc = main(["bench", "--graph", graph_path, "--queries", queries_path,
                   "--out", out])
        assert rc == 0
        with open(out) as fh:
            assert fh.readline().strip() == ",".join(BENCH_CSV_FIELDS)

    def test_expansion_cap_not_fatal(self, grid_files):
        graph_path, queries_path, net, records = grid_files
        rows = run_bench(net, records, threads_list=[1], max_expansions=1)
        # every query trips the cap; rows still come back, tallied infeasible
        assert all(row.infeasible == row.queries for row in rows)

    def test_write_bench_csv_stable_header(self):
        buf = io.StringIO()
        write_bench_csv([], buf)
        assert buf.getvalue().strip() == "set,threads,pruning,avg_score,avg_runtime_s,infeasible,explored_mean,explored_p95"


class TestValidateCommand:
    def test_agreement_run(self, capsys):
        rc = main(["validate", "--instances", "30", "--seed", "3"])
        assert rc == 0
        assert "30/30 agree" in capsys.readouterr().out

    def test_zero_instances_vacuous_pass(self, capsys):
        rc = main(["validate", "--instances", "0"])
        assert rc == 0
        captured = capsys.readouterr()
        assert "0/0 agree" in captured.out
        assert "vacuous" in captured.err

    def test_injected_fault_found(self, capsys, monkeypatch):
        from wayscore import solver as solver_mod
        from wayscore.traversal import latest_departures as real_bounds

        def tightened(net, destination, t_arr, t_dep):
            bounds = real_bounds(net, destination, t_arr, t_dep)
            bounds.times = [t - 1.0 for t in bounds.times]
            return bounds

        monkeypatch.setattr(solver_mod, "latest_departures", tightened)
        rc = main(["validate", "--instances", "40", "--seed", "3"])
        assert rc == 3
        out = capsys.readouterr().out
        assert '"network"' in out and '"oracle"' in out


class TestGenQueriesCommand:
    def test_round_trip_through_cli(self, grid_files, tmp_path, capsys):
        # a 6x6 grid is small, so inflate the overhead to make every
        # default budget bucket reachable
        graph_path, _, _, _ = grid_files
        out = str(tmp_path / "q.csv")
        rc = main(["gen-queries", "--graph", graph_path, "--seed", "5",
                   "--count", "2", "--overhead-pct", "500", "--out", out])
        assert rc == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8  # 2 per default bucket
        assert {r["set"] for r in rows} == {"set-1", "set-2", "set-3", "set-4"}
