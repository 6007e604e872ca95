from pathlib import Path

import pytest

from consensus_plots import PlotJob, SchemaError, render
from consensus_plots.cli import main as cli_main

DATA = Path(__file__).resolve().parents[2] / "data"
EXP1 = DATA / "exp1_desk.csv"
EXP2 = DATA / "exp2_desk.csv"
ROUNDS = DATA / "rounds_biclique_desk.csv"

FAMILIES = {"clique", "cycle", "biclique", "torus_grid", "full_binary_tree"}


def job(kind, csv_path, tmp_path, **kw):
    return PlotJob(input_csv=str(csv_path), kind=kind,
                   output_path=str(tmp_path / "out.png"), **kw)


def test_exp1_biclique_series_strictly_lowest(tmp_path):
    result = render(job("tau_vs_p0", EXP1, tmp_path))
    assert set(result.series) == FAMILIES
    bx, by = result.series["biclique"]
    for family in FAMILIES - {"biclique"}:
        xs, ys = result.series[family]
        assert xs == bx  # same p0 grid
        for b, other in zip(by, ys):
            assert b < other
    assert result.output_path.exists()


def test_exp2_clique_series_within_band(tmp_path):
    result = render(job("tau_vs_n", EXP2, tmp_path))
    xs, ys = result.series["clique"]
    assert xs == sorted(xs)
    assert all(0.9 <= tau <= 1.3 for tau in ys), ys
    # the families that benefit from memory sit below 1
    for family in ("biclique", "cycle"):
        assert all(tau < 1.0 for tau in result.series[family][1])


def test_median_statistic_variant(tmp_path):
    mean_result = render(job("tau_vs_p0", EXP1, tmp_path))
    median_result = render(job("tau_vs_p0", EXP1, tmp_path, statistic="median"))
    assert set(median_result.series) == set(mean_result.series)
    for family, (xs, ys) in median_result.series.items():
        assert xs == mean_result.series[family][0]
        assert all(y > 0 for y in ys)
    # medians differ from means on heavy-tailed families
    assert median_result.series["biclique"][1] != mean_result.series["biclique"][1]


def test_rendering_is_deterministic(tmp_path):
    first = render(job("tau_vs_n", EXP2, tmp_path))
    second = render(job("tau_vs_n", EXP2, tmp_path))
    assert first.series == second.series


def test_log_y_flag_renders(tmp_path):
    result = render(job("tau_vs_p0", EXP1, tmp_path, log_y=True))
    assert result.output_path.exists()


def test_empty_but_valid_csv(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("family,n,p0,runs,arm,mean,std,median,tau\n")
    result = render(job("tau_vs_p0", empty, tmp_path))
    assert result.series == {}
    assert result.output_path.exists()


def test_schema_mismatch_reports_column_diff(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("family,n,arm,tau\nclique,9,memory,0.5\n")
    with pytest.raises(SchemaError) as err:
        render(job("tau_vs_p0", bad, tmp_path))
    assert "missing" in str(err.value)
    assert "p0" in str(err.value)


def test_missing_baseline_detected(tmp_path):
    bad = tmp_path / "nobase.csv"
    bad.write_text(
        "family,n,p0,runs,arm,mean,std,median,tau\n"
        "clique,9,0.9,10,memory,5.0,1.0,5.0,0.9\n"
    )
    with pytest.raises(SchemaError, match="baseline"):
        render(job("tau_vs_p0", bad, tmp_path))


def test_summary_table(tmp_path):
    out = tmp_path / "table.csv"
    result = render(PlotJob(input_csv=str(EXP2), kind="summary_table",
                            output_path=str(out)))
    text = out.read_text()
    assert text.splitlines()[0] == "family,n,mean,std,median"
    assert set(result.series) == FAMILIES
    # biclique's heavy tail: median well below the mean
    n, stats = result.series["biclique"]
    mean, _, median = stats
    assert median < mean


def test_rounds_histogram(tmp_path):
    result = render(PlotJob(input_csv=str(ROUNDS), kind="rounds_histogram",
                            output_path=str(tmp_path / "h.png"), family="biclique"))
    assert set(result.series) == {"memory", "memoryless"}
    mem_rounds, _ = result.series["memory"]
    less_rounds, _ = result.series["memoryless"]
    assert len(mem_rounds) == len(less_rounds) > 0
    assert mem_rounds == sorted(mem_rounds)


def test_cli_end_to_end(tmp_path, capsys):
    out = tmp_path / "fig.png"
    code = cli_main([str(EXP1), "--kind", "tau_vs_p0", "--out", str(out)])
    assert code == 0
    assert out.exists()
    assert str(out) in capsys.readouterr().out


def test_cli_schema_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    code = cli_main([str(bad), "--kind", "tau_vs_n", "--out", str(tmp_path / "f.png")])
    assert code == 1
    assert "error:" in capsys.readouterr().err
