import csv
import json

import numpy as np
import pytest

import config
import core.runner as runner
from core.errors import IncompletenessError, PrecisionError, ValidationError
from core.report_exporter import ReportExporter
from core.run_history import RunHistory
from core.runner import JobConfig, parse_range, run
from core.zeta import zeta_zeros
from main import main

from .conftest import E6_TABLE

E6_TEXT = "[1,1,0,-2582,48720] N=5187563742 r=6"


def read_csv(path):
    with open(path) as f:
        meta = {}
        lines = []
        for line in f:
            if line.startswith('#'):
                key, _, value = line[2:].partition(': ')
                meta[key] = value.strip()
            else:
                lines.append(line)
    rows = list(csv.reader(lines))
    return meta, rows[0], rows[1:]


def test_aptable_of_rank_six(tmp_path, cache_dir):
    out = tmp_path / "e6.csv"
    assert main(['aptable', '--curve', E6_TEXT, '--X', '173', '-o', str(out),
                 '--cache-dir', str(cache_dir)]) == 0
    meta, header, rows = read_csv(out)
    assert header == ['p', 'a_p', 'bad']
    assert {int(p): int(a) for p, a, _ in rows} == E6_TABLE
    assert meta["cache"] == "miss"
    assert "numpy" in meta["versions"]


def test_aptable_from_curve_file(tmp_path):
    curves = tmp_path / "curves.txt"
    curves.write_text("E1\nE2\n")
    out = tmp_path / "wide.csv"
    assert main(['aptable', '--curve-file', str(curves), '--X', '20', '-o', str(out), '--no-cache']) == 0
    _, header, rows = read_csv(out)
    assert header == ['curve', 'a_2', 'a_3', 'a_5', 'a_7', 'a_11', 'a_13', 'a_17', 'a_19']
    assert [r[0] for r in rows] == ['E1', 'E2']
    assert rows[0][1:3] == ['-2', '-3']


def test_artifacts_are_deterministic(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (first, second):
        assert main(['aptable', '--curve', 'E1', '--X', '500', '-o', str(out), '--no-cache']) == 0
    assert first.read_bytes() == second.read_bytes()


def test_invalid_curve_exits_2(tmp_path):
    out = tmp_path / "bad.csv"
    assert main(['aptable', '--curve', '[0,0,0,0,0]', '--X', '100', '-o', str(out), '--no-cache']) == 2
    assert not out.exists()
    assert main(['aptable', '--curve', '[0,0,1', '--X', '100', '-o', str(out), '--no-cache']) == 2
    assert main(['aptable', '--curve', 'E1', '--X', '0', '-o', str(out), '--no-cache']) == 2
    with pytest.raises(SystemExit):
        main(['aptable', '--curve', 'E1'])


def test_bias_json(tmp_path, cache_dir):
    out = tmp_path / "bias.json"
    assert main(['bias', '--curve', 'E1', '--X', '2000', '-o', str(out), '--cache-dir', str(cache_dir)]) == 0
    data = json.loads(out.read_text())
    assert data["rank"] == 1
    assert data["X"] == 2000
    assert data["cache"] == "miss"
    assert data["S_samples"][-1]["x"] == 2000


def test_failed_run_removes_partial_artifacts(tmp_path, monkeypatch):
    def broken_pdf(*args, **kwargs):
        raise PrecisionError("renderer lost precision", 1.0)

    monkeypatch.setattr(ReportExporter, "export_pdf", staticmethod(broken_pdf))
    out = tmp_path / "bias.json"
    assert main(['bias', '--curve', 'E1', '--X', '500', '--pdf', '-o', str(out), '--no-cache']) == 1
    assert not out.exists()


def test_incomplete_zero_list_exits_3(tmp_path, monkeypatch):
    def unresolved(**kwargs):
        raise IncompletenessError("zeta zero count unresolved in windows [(0, 10)]")

    monkeypatch.setattr(runner, "zeta_zeros", unresolved)
    out = tmp_path / "zeros.txt"
    assert main(['zeros', '--zeta', '--count', '5', '-o', str(out), '--no-cache']) == 3
    assert not out.exists()


def test_zeta_zeros_export(tmp_path):
    out = tmp_path / "zeros.txt"
    assert main(['zeros', '--zeta', '--count', '5', '-o', str(out), '--no-cache']) == 0
    values = [float(line) for line in out.read_text().split()]
    assert len(values) == 5
    side = json.loads((tmp_path / "zeros.txt.json").read_text())
    assert side["complete"] is True and side["count"] == 5


def test_zplot_sign_changes_match_zeros(tmp_path):
    out = tmp_path / "z.csv"
    assert main(['zplot', '--zeta', '--t', '0:50:0.05', '-o', str(out), '--no-cache']) == 0
    _, header, rows = read_csv(out)
    assert header == ['t', 'Z']
    ts = np.array([float(r[0]) for r in rows])
    zs = np.array([float(r[1]) for r in rows])
    flips = np.flatnonzero(np.sign(zs[1:]) != np.sign(zs[:-1]))
    zeros = zeta_zeros(T=50.0).ordinates
    assert len(flips) == len(zeros) == 10
    for i, g in zip(flips, zeros):
        assert ts[i] < g < ts[i + 1]


def test_zplot_of_rank_one_curve_adds_ratio(tmp_path, cache_dir):
    out = tmp_path / "e1.csv"
    assert main(['zplot', '--curve', 'E1', '--t', '1:3:0.5', '-o', str(out),
                 '--cache-dir', str(cache_dir)]) == 0
    _, header, rows = read_csv(out)
    assert header == ['t', 'Z', 'Z_over_prediction']
    assert len(rows) == 5


def test_discriminant_count(tmp_path):
    out = tmp_path / "count.json"
    assert main(['discriminants', '--disc-range', '0:100', '-o', str(out), '--no-cache']) == 0
    assert json.loads(out.read_text())["count"] == 30
    assert main(['discriminants', '--disc-range', '3:30', '--prime-window', '-o', str(out),
                 '--no-cache']) == 0
    assert json.loads(out.read_text())["count"] == 9


def test_family_zero_csv(tmp_path):
    out = tmp_path / "family.csv"
    assert main(['zeros', '--disc-range=-10:10', '--T', '12', '-o', str(out), '--no-cache']) == 0
    meta, header, rows = read_csv(out)
    assert header == ['d', 'gamma']
    assert {int(r[0]) for r in rows} == {-8, -7, -4, -3, 5, 8}
    summary = json.loads(meta["summary"])
    assert summary["negative"]["count"] == 4


def test_predict_kernel(tmp_path):
    out = tmp_path / "kernel.csv"
    assert main(['predict', '--kind', 'kernel', '--kernel', 'gue', '--t', '0:3:0.5', '-o', str(out),
                 '--no-cache']) == 0
    _, header, rows = read_csv(out)
    assert header == ['x', 'value', 'label']
    assert len(rows) == 7
    assert float(rows[0][1]) == pytest.approx(0.0)


def test_predict_rank_ratio(tmp_path):
    out = tmp_path / "ratio.csv"
    assert main(['predict', '--kind', 'rank-ratio', '--curve', 'E6', '--t', '1:5:1', '-o', str(out),
                 '--no-cache']) == 0
    _, _, rows = read_csv(out)
    assert len(rows) == 5
    assert all(float(r[1]) > 0 for r in rows)


def test_density_run(tmp_path):
    out = tmp_path / "density.csv"
    assert main(['density', '--disc-range', '0:30', '--hi', '5', '--bin-width', '0.5',
                 '-o', str(out), '--no-cache']) == 0
    meta, header, rows = read_csv(out)
    assert header == ['bin_left', 'bin_right', 'histogram', 'prediction', 'prediction_leading']
    assert len(rows) == 10
    assert meta["family_size"] == "9"


def test_paircorr_montgomery_run(tmp_path):
    out = tmp_path / "pc.csv"
    assert main(['paircorr', '--count', '50', '--mode', 'montgomery', '--bin-width', '0.25',
                 '-o', str(out), '--no-cache']) == 0
    meta, _, rows = read_csv(out)
    assert len(rows) == 12
    assert 0.0 <= float(meta["chi_square_p_value"]) <= 1.0


@pytest.mark.slow
def test_paircorr_raw_run(tmp_path):
    out = tmp_path / "pc_raw.csv"
    assert main(['paircorr', '--T', '100', '--bin-width', '0.5', '-o', str(out), '--no-cache']) == 0
    meta, _, rows = read_csv(out)
    assert len(rows) == 12
    assert float(meta["l2_full"]) >= 0


def test_history(tmp_path, cache_dir):
    out = tmp_path / "x.csv"
    main(['aptable', '--curve', 'E1', '--X', '50', '-o', str(out), '--cache-dir', str(cache_dir)])
    main(['aptable', '--curve', '[0,0,0,0,0]', '--X', '50', '-o', str(out), '--cache-dir', str(cache_dir)])
    stats = RunHistory.get_stats(cache_dir)
    assert stats["total_runs"] == 2
    assert stats["failed_runs"] == 1
    assert stats["by_command"] == {"aptable": 2}
    report = tmp_path / "history.json"
    assert main(['history', '--cache-dir', str(cache_dir), '-o', str(report)]) == 0
    assert json.loads(report.read_text())["total_runs"] == 2


def test_history_keeps_last_entries(cache_dir):
    for i in range(60):
        RunHistory.save_run("aptable", i % 2, [], cache_dir=cache_dir)
    history = RunHistory.load_history(cache_dir)
    assert len(history) == 50
    assert history[-1]["status"] == 1


def test_parse_range():
    assert parse_range("0:50:0.05", 3) == (0.0, 50.0, 0.05)
    assert parse_range("-10:10", 2, int) == (-10, 10)
    with pytest.raises(ValidationError):
        parse_range("1:2", 3)
    with pytest.raises(ValidationError):
        parse_range("a:b", 2, int)


def test_job_config_validation(tmp_path):
    result = run(JobConfig(command='bias', curve='E1', cache_dir=None))
    assert result.exit_status == 2 and result.error_code == "validation"
    result = run(JobConfig(command='zplot', zeta=True, t_range=(5.0, 1.0, 0.1), cache_dir=None))
    assert result.exit_status == 2
    cfg = JobConfig(command='aptable', curve='E1', X=10, output=tmp_path / "out.csv", cache_dir=None)
    assert 'output' not in cfg.echo()


def test_csv_metadata_header(tmp_path):
    path = tmp_path / "meta.csv"
    ReportExporter.export_csv([(1, 0.1)], ['a', 'b'], str(path), {"curve": "E1", "nested": {"k": 1}})
    meta, header, rows = read_csv(path)
    assert meta == {"curve": "E1", "nested": '{"k": 1}'}
    assert header == ['a', 'b'] and rows == [['1', '0.1']]


def test_hours_scale_runs_need_extended(tmp_path, monkeypatch):
    out = tmp_path / "big.json"
    assert main(['bias', '--curve', 'E1', '--X', '100000000', '-o', str(out), '--no-cache']) == 2
    assert not out.exists()
    with pytest.raises(ValidationError):
        JobConfig(command='paircorr', count=100000, cache_dir=None).validate()
    with pytest.raises(ValidationError):
        JobConfig(command='zeros', zeta=True, T=50000.0, cache_dir=None).validate()
    JobConfig(command='bias', curve='E1', X=10 ** 8, extended=True, cache_dir=None).validate()
    JobConfig(command='paircorr', count=100000, extended=True, cache_dir=None).validate()
    JobConfig(command='zeros', zeta=True, T=1000.0, cache_dir=None).validate()

    monkeypatch.setattr(config, 'EXTENDED_MAX_FAMILY', 3)
    result = run(JobConfig(command='zeros', disc_range=(-10, 10), T=12.0, cache_dir=None,
                           output=tmp_path / "family.csv"))
    assert result.exit_status == 2 and result.error_code == "validation"
    assert "family size 6" in result.message
