"""
Tests for the benchmark harness: objectives, runner, CSV report and CLI.
"""

import csv
import io
import json
import math
import time

import numpy as np
import pytest

from scripts import bench
from squirrel.bench.functions import (
    FuncSpec,
    ackley,
    branin,
    builtin_functions,
    get_functions,
    mixed,
    rosenbrock,
    sphere,
)
from squirrel.bench.report import CSV_COLUMNS, read_results, report, summarize, write_results
from squirrel.bench.runner import (
    RandomSearch,
    build_registry,
    ensure_demo_registry,
    evaluate_safely,
    run_experiment,
    run_once,
)
from squirrel.errors import ConfigError, ProtocolError
from squirrel.models import OptimizerSettings, RunResult
from squirrel.scheduler import SquirrelOptimizer
from squirrel.space import build_space, sample_random

LINE = build_space([{"name": "x", "kind": "continuous", "lower": 0, "upper": 1}])


class TestFunctions:
    def test_known_optima(self):
        assert sphere(np.zeros(10)) == 0.0
        assert rosenbrock(np.ones(5)) == 0.0
        assert branin(math.pi, 2.275) == pytest.approx(0.397887, abs=1e-5)
        assert abs(ackley(np.zeros(5))) <= 1e-12
        assert mixed({"x0": 2.0, "x1": -1.0, "lr": 1e-2, "depth": 4, "bowl": "b"}) == 0.0

    def test_builtin_names(self):
        names = [f.name for f in builtin_functions()]
        assert names == ["sphere-10d", "branin-2d", "rosenbrock-5d", "ackley-5d", "mixed-5d"]

    def test_optimum_is_lower_bound_on_random_samples(self):
        rng = np.random.default_rng(0)
        for func in builtin_functions():
            for _ in range(50):
                assert func.evaluate(sample_random(func.space, rng)) >= func.known_optimum - 1e-6

    def test_get_functions(self):
        assert [f.name for f in get_functions("branin-2d, sphere-10d")] == ["branin-2d", "sphere-10d"]
        assert len(get_functions("all")) == 5

    @pytest.mark.parametrize("selection", ["nope", "branin-2d,nope", ""])
    def test_get_functions_unknown(self, selection):
        with pytest.raises(ConfigError):
            get_functions(selection)


class TestRunner:
    def test_random_run_is_monotone(self):
        func = get_functions("branin-2d")[0]
        result = run_once("random", func, seed=0)
        assert len(result.best_so_far) == 16
        assert all(b <= a for a, b in zip(result.best_so_far, result.best_so_far[1:]))
        assert result.final_best == result.best_so_far[-1]

    def test_same_seed_same_result(self):
        func = get_functions("sphere-10d")[0]
        a = run_once("random", func, seed=3)
        b = run_once("random", func, seed=3)
        assert a.best_so_far == b.best_so_far

    def test_squirrel_run(self, fast_settings):
        func = get_functions("branin-2d")[0]
        result = run_once("squirrel", func, seed=0, settings=fast_settings)
        assert len(result.best_so_far) == 16
        assert result.optimizer == "squirrel"

    def test_squirrel_survives_always_raising_objective(self, fast_settings):
        branin_space = get_functions("branin-2d")[0].space

        def explode(config):
            raise RuntimeError("simulator crashed")

        result = run_once("squirrel", FuncSpec("explode", branin_space, explode), seed=0, settings=fast_settings)
        assert len(result.best_so_far) == 16
        assert all(v == math.inf for v in result.best_so_far)

    def test_unknown_optimizer(self):
        with pytest.raises(ConfigError):
            run_once("grid", get_functions("branin-2d")[0], seed=0)

    def test_experiment_sorted(self):
        results = run_experiment("random", get_functions("sphere-10d,branin-2d"), [1, 0])
        keys = [(r.function, r.seed) for r in results]
        assert keys == [("branin-2d", 0), ("branin-2d", 1), ("sphere-10d", 0), ("sphere-10d", 1)]

    def test_experiment_needs_seeds(self):
        with pytest.raises(ConfigError):
            run_experiment("random", get_functions("branin-2d"), [])

    def test_evaluate_safely(self):
        def boom(config):
            raise ZeroDivisionError("boom")

        assert evaluate_safely(FuncSpec("boom", LINE, boom), {"x": 0.5}) == math.inf
        assert evaluate_safely(FuncSpec("nan", LINE, lambda c: float("nan")), {"x": 0.5}) == math.inf
        assert evaluate_safely(FuncSpec("ok", LINE, lambda c: c["x"]), {"x": 0.5}) == 0.5

    def test_random_search_protocol(self):
        opt = RandomSearch(LINE, seed=0)
        opt.suggest()
        with pytest.raises(ProtocolError):
            opt.suggest()
        with pytest.raises(ProtocolError):
            opt.observe(None, [1.0])

    @pytest.mark.slow
    def test_build_registry(self, fast_settings):
        registry = build_registry(get_functions("branin-2d"), [0, 1], fast_settings)
        configs = next(iter(registry.entries.values()))
        assert len(configs) == 22

    @pytest.mark.slow
    def test_ensure_demo_registry_builds_once(self, fast_settings, tmp_path):
        path = tmp_path / "demo.json"
        first = ensure_demo_registry(str(path), fast_settings)
        assert path.exists()
        assert len(first) == 1
        stamp = path.stat().st_mtime_ns
        assert ensure_demo_registry(str(path), fast_settings).entries == first.entries
        assert path.stat().st_mtime_ns == stamp


def _without_wall_time(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    drop = rows[0].index("wall_time")
    return [row[:drop] + row[drop + 1:] for row in rows]


@pytest.mark.slow
class TestEndToEnd:
    @pytest.mark.parametrize("name", ["branin-2d", "sphere-10d"])
    def test_median_beats_random_search(self, name):
        functions = get_functions(name)
        seeds = list(range(10))
        squirrel = run_experiment("squirrel", functions, seeds)
        baseline = run_experiment("random", functions, seeds)
        assert [r.seed for r in squirrel] == [r.seed for r in baseline]
        assert np.median([r.final_best for r in squirrel]) < np.median([r.final_best for r in baseline])

    def test_bench_csv_is_reproducible(self, tmp_path):
        settings = tmp_path / "settings.yaml"
        settings.write_text("gp_restarts: 4\ngp_maxiter: 10\nrf_trees: 16\nn_random_candidates: 128\n")
        paths = []
        for i in range(2):
            out = str(tmp_path / f"run{i}.csv")
            argv = ["run", "--functions", "branin-2d,mixed-5d", "--optimizer", "squirrel",
                    "--seeds", "0..1", "--settings", str(settings), "--out", out]
            assert bench.main(argv) == 0
            paths.append(out)
        assert _without_wall_time(paths[0]) == _without_wall_time(paths[1])
        assert len(_without_wall_time(paths[0])) == 1 + 2 * 2 * 16

    def test_default_run_time_on_mixed_space(self):
        func = get_functions("mixed-5d")[0]
        optimizer = SquirrelOptimizer(func.space, seed=0)
        spent = 0.0
        for _ in range(16):
            t0 = time.perf_counter()
            batch = optimizer.suggest()
            spent += time.perf_counter() - t0
            values = [func.evaluate(c) for c in batch]
            t0 = time.perf_counter()
            optimizer.observe(None, values)
            spent += time.perf_counter() - t0
        assert optimizer.finished
        assert spent < 5.0


def _result(function="branin-2d", optimizer="random", seed=0, values=(3.0, 2.0, 2.0)):
    return RunResult(
        function=function, optimizer=optimizer, seed=seed,
        best_so_far=list(values), final_best=values[-1], wall_time=1.25,
    )


class TestReport:
    def test_csv_layout(self, tmp_path):
        path = str(tmp_path / "out" / "results.csv")
        write_results([_result(values=tuple(float(16 - i) for i in range(16)))], path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == CSV_COLUMNS
        assert len(rows) == 17
        assert rows[1] == ["branin-2d", "random", "0", "0", "16.0", "1.250"]

    def test_empty_results_header_only(self, tmp_path):
        path = str(tmp_path / "empty.csv")
        write_results([], path)
        with open(path) as f:
            assert f.read().strip() == ",".join(CSV_COLUMNS)

    def test_read_back(self, tmp_path):
        path = str(tmp_path / "results.csv")
        results = [_result(seed=1), _result(optimizer="squirrel", values=(1.0, 0.5, 0.1))]
        write_results(results, path)
        back = read_results(path)
        assert [(r.optimizer, r.seed, r.best_so_far) for r in back] == [
            ("random", 1, [3.0, 2.0, 2.0]),
            ("squirrel", 0, [1.0, 0.5, 0.1]),
        ]

    def test_inf_survives(self, tmp_path):
        path = str(tmp_path / "results.csv")
        write_results([_result(values=(math.inf, 1.0))], path)
        assert read_results(path)[0].best_so_far == [math.inf, 1.0]

    def test_read_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ConfigError):
            read_results(str(path))

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(ConfigError):
            write_results([_result()], str(blocker / "results.csv"))

    def test_summary_win_rate(self):
        results = [
            _result(optimizer="random", seed=0, values=(2.0,)),
            _result(optimizer="random", seed=1, values=(1.0,)),
            _result(optimizer="squirrel", seed=0, values=(1.0,)),
            _result(optimizer="squirrel", seed=1, values=(1.0,)),
        ]
        summary = summarize(results)
        assert "branin-2d" in summary
        assert "win rate random vs squirrel: 0.00 (0 wins, 1 ties, 2 paired seeds)" in summary

    def test_report_writes_and_summarizes(self, tmp_path):
        path = str(tmp_path / "r.csv")
        assert "median final best" in report([_result()], path)
        assert len(read_results(path)) == 1


class TestCli:
    def test_run_and_report(self, tmp_path, capsys):
        out = str(tmp_path / "random.csv")
        code = bench.main(["run", "--functions", "branin-2d", "--optimizer", "random", "--seeds", "0..1", "--out", out])
        assert code == 0
        assert len(read_results(out)) == 2
        capsys.readouterr()
        assert bench.main(["report", "--in", out]) == 0
        assert "win rate" not in capsys.readouterr().out

    def test_unknown_function_exit_code(self, tmp_path):
        out = str(tmp_path / "x.csv")
        assert bench.main(["run", "--functions", "nope", "--out", out]) == 2

    def test_bad_seeds_exit_code(self, tmp_path):
        assert bench.main(["run", "--seeds", "a..b", "--out", str(tmp_path / "x.csv")]) == 2

    def test_missing_report_input(self, tmp_path):
        assert bench.main(["report", "--in", str(tmp_path / "missing.csv")]) == 2

    def test_resume_needs_space(self, tmp_path):
        assert bench.main(["serve", "--resume", str(tmp_path / "h.csv")]) == 2

    def test_serve_protocol_error_exit_code(self, tmp_path, monkeypatch, capsys):
        space = tmp_path / "space.json"
        space.write_text(json.dumps([{"name": "x", "kind": "continuous", "lower": 0, "upper": 1}]))
        monkeypatch.setattr("sys.stdin", io.StringIO('{"op": "observe", "values": [1.0]}\n'))
        assert bench.main(["serve", "--space", str(space)]) == 3
        assert "error" in json.loads(capsys.readouterr().out.splitlines()[0])

    def test_serve_dumps_history(self, tmp_path, monkeypatch, capsys):
        space = tmp_path / "space.json"
        space.write_text(json.dumps([{"name": "x", "kind": "continuous", "lower": 0, "upper": 1}]))
        settings = tmp_path / "settings.yaml"
        settings.write_text("gp_restarts: 2\nrf_trees: 8\n")
        dump = tmp_path / "history.csv"
        monkeypatch.setattr("sys.stdin", io.StringIO(
            '{"op": "suggest"}\n{"op": "observe", "values": [1, 2, 3, 4, 5, 6, 7, 8]}\n'
        ))
        code = bench.main(["serve", "--space", str(space), "--settings", str(settings), "--dump", str(dump)])
        assert code == 0
        assert len(dump.read_text().strip().splitlines()) == 9

    def test_serve_unwritable_dump_exit_code(self, tmp_path, monkeypatch, capsys):
        space = tmp_path / "space.json"
        space.write_text(json.dumps([{"name": "x", "kind": "continuous", "lower": 0, "upper": 1}]))
        blocker = tmp_path / "file"
        blocker.write_text("")
        monkeypatch.setattr("sys.stdin", io.StringIO(""))
        assert bench.main(["serve", "--space", str(space), "--dump", str(blocker / "history.csv")]) == 2

    def test_settings_flags(self):
        args = bench.build_parser().parse_args(["run", "--no-shuffle"])
        settings = bench._settings(args)
        assert isinstance(settings, OptimizerSettings)
        assert settings.shuffle_portfolio is False
