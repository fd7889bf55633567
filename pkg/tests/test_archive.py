import json

import numpy as np
import pandas as pd
import pytest

from mofilter.archive import FILTER_COLUMNS, RunArchive, filter_frame, trace_frame, write_run
from mofilter.config import Config
from mofilter.driver import RESTORATION, solve, trace_columns
from mofilter.problem import two_parabolas

from conftest import quadratic_k1


@pytest.fixture(scope="module")
def short_run():
    return solve(quadratic_k1(center=(1.0,)), [0.0], Config(model_kind="taylor2"))


@pytest.fixture(scope="module")
def restored_run():
    # startet im Einheitskreis, also mit Restauration
    return solve(two_parabolas(), [0.0, 0.0], Config(max_iter=3))


class TestFrames:
    def test_trace_columns(self, short_run):
        df = trace_frame(short_run)
        assert list(df.columns) == trace_columns(1)
        assert len(df) == len(short_run.log)

    def test_filter_frame(self, restored_run):
        df = filter_frame(restored_run)
        assert list(df.columns) == FILTER_COLUMNS
        assert len(df) == len(restored_run.filter_entries) >= 1
        assert (df["theta_j"] > 0).all()

    def test_restoration_row(self, restored_run):
        df = trace_frame(restored_run)
        assert df.iloc[0]["kind"] == RESTORATION
        assert np.isnan(df.iloc[0]["rho"])


class TestWriteRun:
    def test_files(self, short_run, tmp_path):
        paths = write_run(short_run, tmp_path / "run")
        assert paths.result_json.exists() and paths.trace_csv.exists() and paths.filter_csv.exists()
        assert not paths.trace_parquet.exists()
        data = json.loads(paths.result_json.read_text(encoding="utf-8"))
        assert data["status"] == short_run.status
        assert data["iterations"] == short_run.iterations
        assert data["config"]["model_kind"] == "taylor2"

    def test_deterministic(self, short_run, tmp_path):
        a = write_run(short_run, tmp_path / "a")
        b = write_run(short_run, tmp_path / "b")
        assert a.trace_csv.read_bytes() == b.trace_csv.read_bytes()
        assert a.result_json.read_bytes() == b.result_json.read_bytes()

    def test_floats_survive(self, restored_run, tmp_path):
        archive = RunArchive(write_run(restored_run, tmp_path).root)
        expected = trace_frame(restored_run)
        pd.testing.assert_series_equal(archive.trace["phi"], expected["phi"])


class TestRunArchive:
    def test_roundtrip_queries(self, restored_run, tmp_path):
        archive = RunArchive(write_run(restored_run, tmp_path).root)
        assert archive.status == restored_run.status
        assert sum(archive.kinds().values()) == len(restored_run.log)
        assert archive.kinds()[RESTORATION] == restored_run.restorations
        assert len(archive.trajectory()) == len(restored_run.log)
        assert archive.iteration(0)["kind"] == RESTORATION
        assert archive.iteration(10_000) is None

    def test_missing_file(self, short_run, tmp_path):
        paths = write_run(short_run, tmp_path)
        paths.filter_csv.unlink()
        with pytest.raises(FileNotFoundError):
            RunArchive(tmp_path)

    def test_missing_column(self, short_run, tmp_path):
        paths = write_run(short_run, tmp_path)
        pd.read_csv(paths.trace_csv).drop(columns=["chi"]).to_csv(paths.trace_csv, index=False)
        with pytest.raises(ValueError, match="chi"):
            RunArchive(tmp_path)
