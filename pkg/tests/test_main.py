import json
from pathlib import Path

from main import run_formats_mode, run_fuzz_mode, run_scenario_mode, run_validate_mode

SANDBOX = str(Path(__file__).parent.parent / 'scenarios' / 'sandbox-s3.json')


def test_validate_mode():
    assert run_validate_mode(SANDBOX)['success']
    missing = run_validate_mode('no/such/file.json')
    assert not missing['success'] and 'error' in missing


def test_run_then_render(tmp_path):
    out = tmp_path / 'out' / 's3.json'
    result = run_scenario_mode(SANDBOX, out=str(out), use_corpus=False)
    assert result['success'] and not result['invalid']
    assert json.loads(out.read_text())['report_metadata']['name'] == 'sandbox-s3'
    assert (tmp_path / 'out' / 's3.md').exists()

    rendered = tmp_path / 'again.md'
    assert run_formats_mode(str(out), 'human', str(rendered))['success']
    assert rendered.read_text() == (tmp_path / 'out' / 's3.md').read_text()


def test_invalid_scenario_is_flagged(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps({'objects': {'X': {'kind': 'nothing'}}}))
    result = run_scenario_mode(str(path), out=str(tmp_path / 'bad_report.json'), use_corpus=False)
    assert not result['success']
    assert result['invalid']


def test_fuzz_mode_without_corpus(tmp_path):
    result = run_fuzz_mode('theorem1', seed=2, count=2, out=str(tmp_path / 'fuzz.json'), use_corpus=False)
    assert result['success']
