import csv
import json

import numpy as np
import pytest

from specavg import DenseSymmetric, SyntheticSpec, synth_symmetric, write_matrix_market
from specavg.cli import (
    BLOWUP_COLUMNS,
    BOUNDS_COLUMNS,
    PAGERANK_COLUMNS,
    SPEEDUP_COLUMNS,
    SWEEP_COLUMNS,
    main,
)

from conftest import random_symmetric


@pytest.fixture
def matrix_file(tmp_path):
    spec = SyntheticSpec(n=20, spectrum=(1.0, 0.4), seed=1)
    m, _ = synth_symmetric(spec)
    path = tmp_path / "m.mtx"
    write_matrix_market(path, m)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


class TestExitCodes:
    def test_missing_input_is_parse_error(self, tmp_path):
        code = main(["bounds", "--input", str(tmp_path / "nope.mtx"),
                     "--p", "0.5"])
        assert code == 2

    def test_malformed_matrix_is_parse_error(self, tmp_path):
        bad = tmp_path / "bad.mtx"
        bad.write_text("garbage\n")
        assert main(["bounds", "--input", str(bad), "--p", "0.5"]) == 2

    def test_non_convergence_is_three(self):
        # p so tiny every subsampled operator is the zero matrix: the
        # Perron iteration has nothing to converge to
        code = main(["pagerank-sweep", "--gen-nodes", "10",
                     "--p-grid", "1e-9", "--samples", "1"])
        assert code == 3

    def test_infeasible_config_is_four(self, tmp_path):
        code = main(["synth", "--n", "10", "--spectrum", "1.0,0.5,0.25",
                     "--supports", "10,1,1",
                     "--out", str(tmp_path / "x.mtx")])
        assert code == 4

    def test_argparse_errors_exit_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["bounds"])  # missing required flags
        assert exc.value.code == 2


class TestBounds:
    def test_json_schema(self, matrix_file, tmp_path):
        out = tmp_path / "bounds.json"
        code = main(["bounds", "--input", matrix_file, "--p", "0.25",
                     "--out-format", "json", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert set(payload) == set(BOUNDS_COLUMNS)
        assert payload["bound_am07"] > 0
        assert payload["bound_incoherence"] > 0
        assert isinstance(payload["alpha"], list)
        assert isinstance(payload["admissible"], bool)

    def test_csv_golden_header(self, matrix_file, tmp_path):
        out = tmp_path / "bounds.csv"
        assert main(["bounds", "--input", matrix_file, "--p", "0.25",
                     "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == BOUNDS_COLUMNS
        assert len(rows) == 2


class TestEstimate:
    def test_report_json(self, matrix_file, tmp_path):
        report = tmp_path / "report.json"
        code = main(["estimate", "--input", matrix_file, "--p", "0.6",
                     "--samples", "5", "--seed", "3",
                     "--report", str(report)])
        assert code == 0
        payload = json.loads(report.read_text())
        assert len(payload["nu"]) == 20
        assert payload["alignment"] is not None
        assert payload["num_samples"] == 5
        assert payload["gauge"] == "avg-norm"
        np.testing.assert_allclose(np.linalg.norm(payload["nu"]), 1.0,
                                   atol=1e-10)

    def test_no_truth(self, matrix_file, tmp_path):
        report = tmp_path / "report.json"
        assert main(["estimate", "--input", matrix_file, "--p", "0.6",
                     "--samples", "2", "--no-truth",
                     "--report", str(report)]) == 0
        payload = json.loads(report.read_text())
        assert payload["alignment"] is None

    def test_gauge_flag(self, matrix_file, tmp_path):
        report = tmp_path / "r.json"
        assert main(["estimate", "--input", matrix_file, "--p", "0.6",
                     "--samples", "4", "--gauge", "norm-avg",
                     "--report", str(report)]) == 0
        assert json.loads(report.read_text())["gauge"] == "norm-avg"

    def test_figure_rendered(self, matrix_file, tmp_path):
        fig = tmp_path / "estimate.png"
        assert main(["estimate", "--input", matrix_file, "--p", "0.6",
                     "--samples", "4", "--report",
                     str(tmp_path / "r.json"), "--fig", str(fig)]) == 0
        assert fig.stat().st_size > 0


class TestSweep:
    def test_csv_golden_header(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--n", "16", "--spectrum", "1.0,0.3",
                     "--p-grid", "0.5,1.0", "--samples", "4",
                     "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == SWEEP_COLUMNS
        assert len(rows) == 3

    def test_sample_grid_mode(self, tmp_path):
        out = tmp_path / "nsweep.csv"
        code = main(["sweep", "--n", "16", "--spectrum", "1.0,0.3",
                     "--sample-grid", "1,4", "--p", "0.5",
                     "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert [r[1] for r in rows[1:]] == ["1", "4"]

    def test_matrix_input_and_fig(self, matrix_file, tmp_path):
        out = tmp_path / "sweep.csv"
        fig = tmp_path / "sweep.png"
        code = main(["sweep", "--input", matrix_file,
                     "--p-grid", "0.5,1.0", "--samples", "3",
                     "--out", str(out), "--fig", str(fig)])
        assert code == 0
        assert fig.stat().st_size > 0


class TestPagerankSweep:
    def test_csv_golden_header_and_variants(self, tmp_path):
        out = tmp_path / "pr.csv"
        code = main(["pagerank-sweep", "--gen-nodes", "25",
                     "--p-grid", "0.5,1.0", "--samples", "3",
                     "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == PAGERANK_COLUMNS
        variants = {r[1] for r in rows[1:]}
        assert variants == {"damped", "adjacency"}

    def test_edge_list_input(self, tmp_path):
        edges = tmp_path / "g.txt"
        edges.write_text("# nodes: 6\n0 1\n1 2\n2 0\n3 0\n4 0\n5 1\n")
        out = tmp_path / "pr.csv"
        code = main(["pagerank-sweep", "--edges", str(edges),
                     "--p-grid", "1.0", "--samples", "2",
                     "--variant", "damped", "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert float(rows[1][3]) == pytest.approx(1.0)

    def test_exactly_one_source(self, tmp_path):
        assert main(["pagerank-sweep", "--p-grid", "1.0"]) == 4


class TestBlowup:
    def test_csv_golden_header(self, tmp_path):
        out = tmp_path / "blowup.csv"
        code = main(["blowup", "--delta", "0.5", "--n-grid", "128,256",
                     "--draws", "2", "--csv", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == BLOWUP_COLUMNS
        assert len(rows) == 5  # header + 2 n * 2 draws

    def test_contrast_regime_flag(self, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["blowup", "--delta", "0.5", "--n-grid", "128",
                     "--draws", "2", "--regime", "contrast",
                     "--out", str(out)]) == 0
        rows = read_csv(out)
        p = float(rows[1][1])
        assert p == pytest.approx(np.log(128) ** 2 / 128)

    def test_fig(self, tmp_path):
        fig = tmp_path / "blow.png"
        assert main(["blowup", "--delta", "0.5", "--n-grid", "128,256",
                     "--draws", "2", "--out", str(tmp_path / "b.csv"),
                     "--fig", str(fig)]) == 0
        assert fig.stat().st_size > 0


class TestSpeedupSynthGraph:
    def test_speedup_header(self, tmp_path):
        out = tmp_path / "speed.csv"
        code = main(["speedup", "--n", "64", "--spectrum", "1.0,0.3",
                     "--p-grid", "0.5,1.0", "--reps", "2",
                     "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == SPEEDUP_COLUMNS

    def test_synth_emits_matrix_market(self, tmp_path):
        out = tmp_path / "synth.mtx"
        code = main(["synth", "--n", "12", "--spectrum", "1.0,0.5",
                     "--supports", "4,8", "--out", str(out)])
        assert code == 0
        from specavg import read_matrix_market

        m = read_matrix_market(out)
        assert isinstance(m, DenseSymmetric)
        assert m.n == 12

    def test_gen_graph_round_trip(self, tmp_path):
        out = tmp_path / "g.txt"
        code = main(["gen-graph", "--nodes", "30", "--seed", "7",
                     "--out", str(out)])
        assert code == 0
        from specavg import load_edge_list

        g = load_edge_list(out)
        assert g.n == 30
        assert g.num_edges > 0

    def test_json_out_format(self, tmp_path):
        out = tmp_path / "sweep.json"
        code = main(["sweep", "--n", "16", "--spectrum", "1.0,0.3",
                     "--p-grid", "1.0", "--samples", "2",
                     "--out-format", "json", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert isinstance(payload, list) and len(payload) == 1
        assert set(payload[0]) == set(SWEEP_COLUMNS)
