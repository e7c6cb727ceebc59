"""Tests for the randprep command line."""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import pytest

from randprep.amplitudes import AmplitudeVector, write_state
from randprep.cli import main as cli_main
from randprep.generators import SyntheticSpec, synthetic_state


@pytest.fixture
def toy_file(tmp_path: Path, toy_state: AmplitudeVector) -> Path:
    path = tmp_path / 'toy.json'
    write_state(path, toy_state)
    return path


def _run(monkeypatch: pytest.MonkeyPatch, *args: str) -> int:
    monkeypatch.setattr(sys, 'argv', ['randprep', *args])
    return cli_main.main()


def test_gen_synthetic_to_stdout(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
) -> None:
    rc = _run(monkeypatch, 'gen', 'synthetic', '--kind', 'geometric', '--rate', '0.5', '--dim', '8')
    assert rc == 0
    data = json.loads(capsys.readouterr().out)
    assert data['n_qubits'] == 3
    assert data['label'] == 'synthetic:geometric:0.5'
    assert data['values'][1] / data['values'][0] == pytest.approx(0.5)


def test_gen_tfim_to_file(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    out = tmp_path / 'tfim.json'
    rc = _run(monkeypatch, 'gen', 'tfim', '--n', '5', '--h', '0.8', '-o', str(out))
    assert rc == 0
    data = json.loads(out.read_text(encoding='utf-8'))
    assert data['n_qubits'] == 5
    assert data['label'] == 'tfim:N=5,J=1,h=0.8'
    assert sum(v * v for v in data['values']) == pytest.approx(1.0)


def test_analyze_toy(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str], toy_file: Path
) -> None:
    rc = _run(
        monkeypatch,
        'analyze',
        '--state',
        str(toy_file),
        '--threshold',
        '0.2',
        '--oracle',
        '--members',
        '--pauli',
        'Z0',
    )
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report['dist_rand'] == pytest.approx(0.04 / 1.02, abs=1e-12)
    assert report['dist_rand_oracle'] == pytest.approx(0.04 / 1.02, abs=1e-10)
    assert report['dist_det'] == pytest.approx(2.0 * math.sqrt(0.02))
    assert report['observable']['error'] == pytest.approx(0.98 * 0.02 / 1.02, abs=1e-12)
    assert len(report['ensemble']['members']) == 2


def test_analyze_observable_file(
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
    tmp_path: Path,
    toy_file: Path,
) -> None:
    obs = tmp_path / 'zz.json'
    rows = [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]]
    obs.write_text(json.dumps({'k_qubits': 2, 'rows': rows}), encoding='utf-8')
    args = ['analyze', '--state', str(toy_file), '--threshold', '0.2']
    rc = _run(monkeypatch, *args, '--observable', str(obs))
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report['observable']['error'] == pytest.approx(0.96 - 0.94 / 1.02, abs=1e-12)


def test_analyze_empty_kept_set_exits_1(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str], toy_file: Path
) -> None:
    rc = _run(monkeypatch, 'analyze', '--state', str(toy_file), '--threshold', '2')
    assert rc == 1
    assert 'Error: empty kept set' in capsys.readouterr().err


def test_missing_state_file_exits_1(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str], tmp_path: Path
) -> None:
    rc = _run(
        monkeypatch, 'analyze', '--state', str(tmp_path / 'none.json'), '--threshold', '0.1'
    )
    assert rc == 1
    assert capsys.readouterr().err.startswith('Error:')


def test_bad_argument_exits_1(monkeypatch: pytest.MonkeyPatch, toy_file: Path) -> None:
    with pytest.raises(SystemExit) as excinfo:
        _run(monkeypatch, 'analyze', '--state', str(toy_file), '--threshold', '-0.1')
    assert excinfo.value.code == 1
    with pytest.raises(SystemExit) as excinfo:
        _run(monkeypatch, 'sweep', '--state', str(toy_file), '--thresholds', '0.3:0.1:4')
    assert excinfo.value.code == 1


def test_numeric_failure_exits_2(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str], toy_file: Path
) -> None:
    def _fail(*_args: object, **_kwargs: object) -> dict[str, object]:
        raise RuntimeError('mixture distance exceeds the mixing-lemma bound')

    monkeypatch.setattr('randprep.cli.main.analyze_state', _fail)
    rc = _run(monkeypatch, 'analyze', '--state', str(toy_file), '--threshold', '0.2')
    assert rc == 2
    assert 'mixing-lemma' in capsys.readouterr().err


def test_sweep_writes_verified_csv(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str], tmp_path: Path
) -> None:
    state = tmp_path / 'geo.json'
    write_state(state, synthetic_state(SyntheticSpec('geometric', 0.5, 64)))
    out = tmp_path / 'sweep.csv'
    args = ['sweep', '--state', str(state), '--thresholds', '1e-6:0.1:6', '-o', str(out)]
    rc = _run(monkeypatch, *args, '--reduction-target', '1e-4', '--min-reduction', '0.45')
    assert rc == 0
    lines = out.read_text(encoding='utf-8').splitlines()
    assert lines[0].startswith('threshold,k_kept,eps')
    assert len(lines) == 7
    err = capsys.readouterr().err
    assert '# reduction at target 0.0001: K_det=15' in err


def test_sweep_reduction_below_minimum_exits_2(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str], toy_file: Path
) -> None:
    args = ['sweep', '--state', str(toy_file), '--thresholds', '0.2']
    rc = _run(monkeypatch, *args, '--reduction-target', '0.5', '--min-reduction', '0.5')
    assert rc == 2
    captured = capsys.readouterr()
    assert captured.out.startswith('threshold,')
    assert 'below required' in captured.err


def test_sample(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str], toy_file: Path
) -> None:
    args = ('sample', '--state', str(toy_file), '--threshold', '0.2', '--shots', '20000')
    assert _run(monkeypatch, *args, '--seed', '5') == 0
    first = json.loads(capsys.readouterr().out)
    assert _run(monkeypatch, *args, '--seed', '5') == 0
    again = json.loads(capsys.readouterr().out)
    assert first == again
    assert first['observable'] == 'Z0'
    assert first['exact_value'] == pytest.approx(0.5 * (0.94 / 1.02 + 1.0))
    assert first['frequency_check'] is True
    assert sum(first['draw_counts'].values()) == 20000


def test_resources_prescribed_model(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
) -> None:
    args = ['resources', '--tau', '1e-6', '--kind', 'geometric', '--rate', '0.9']
    rc = _run(monkeypatch, *args, '--dim', '1024')
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report['model']['kind'] == 'geometric'
    assert report['plans'][0]['k_det'] == 132
    assert report['plans'][0]['k_rand'] == 66
    assert 'state' not in report


def test_resources_fit_from_state(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str], tmp_path: Path
) -> None:
    state = tmp_path / 'geo.json'
    write_state(state, synthetic_state(SyntheticSpec('geometric', 0.9, 1024)))
    args = ['resources', '--state', str(state), '--tau', '1e-3,1e-6']
    rc = _run(monkeypatch, *args, '--threshold', '0.01')
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report['model']['rate'] == pytest.approx(0.9, rel=1e-9)
    assert [plan['tau'] for plan in report['plans']] == [1e-3, 1e-6]
    assert report['state']['n_qubits'] == 10
    assert report['t_count']['randomized'] < report['t_count']['exact']


def test_resources_argument_checks(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
) -> None:
    assert _run(monkeypatch, 'resources', '--tau', '1e-3', '--kind', 'geometric') == 1
    assert '--kind and --rate' in capsys.readouterr().err
    assert _run(monkeypatch, 'resources', '--tau', '1e-3') == 1
    assert 'needs --state' in capsys.readouterr().err
