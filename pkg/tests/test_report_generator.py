import json
from fractions import Fraction

import numpy as np
import pytest

from config.config import Config
from src.reports.report_generator import ReportGenerator, build_report, to_plain


@pytest.fixture
def report():
    tasks = [
        {'index': 0, 'op': 'homology', 'expect': 'value', 'status': 'value',
         'result': {'homology': {1: 0, 0: 2}}},
        {'index': 1, 'op': 'check_comodule', 'expect': 'pass', 'status': 'fail',
         'result': {'passed': False, 'axiom': 'counitality', 'witness': {'basis': 'm0'}}},
    ]
    return build_report('scenario', 'demo', 3, tasks)


def test_to_plain():
    assert to_plain({1: np.int64(4), 'a': np.array([[1, 0]]), 'f': Fraction(1, 2), 'g': Fraction(4, 1)}) == \
        {'1': 4, 'a': [[1, 0]], 'f': '1/2', 'g': 4}


def test_summary(report):
    summary = report['report_data']['summary']
    assert summary == {'total': 2, 'passed': 0, 'failed': 1, 'errors': 0, 'success': False}
    assert report['report_metadata']['seed'] == 3


def test_structured_is_stable(report):
    gen = ReportGenerator()
    text = gen.structured(report)
    assert text == gen.structured(json.loads(text))
    assert text.index('"report_data"') < text.index('"report_metadata"')
    assert gen.digest(report) == gen.digest(json.loads(text))


def test_homology_tables_sorted_by_degree(report):
    tables = ReportGenerator().homology_tables(report)
    assert len(tables) == 1
    assert tables[0]['frame']['degree'].tolist() == [0, 1]
    assert tables[0]['frame']['dim'].tolist() == [2, 0]


def test_homology_tables_keep_divisible_labels():
    tasks = [{'index': 0, 'op': 'lphi_iwasawa', 'expect': 'value', 'status': 'value',
              'result': {'homology': {'0': 'C^1', '-1': 2}}}]
    gen = ReportGenerator()
    report = build_report('scenario', 'free', 1, tasks)
    frame = gen.homology_tables(report)[0]['frame']
    assert frame['dim'].tolist() == [2, 'C^1']
    assert '| 0 | C^1 |' in gen.human(report)


def test_human(report):
    text = ReportGenerator().human(report)
    assert '| 1 | check_comodule | pass | fail |' in text
    assert 'counitality' in text
    assert '## Homology tables' in text
    assert 'FAIL' in text


def test_render_unknown_format(report):
    with pytest.raises(ValueError):
        ReportGenerator().render(report, 'pdf')


def test_write(report, tmp_path):
    paths = ReportGenerator(str(tmp_path)).write(report)
    assert paths['structured'].endswith('scenario_demo_3.json')
    assert paths['human'].endswith('scenario_demo_3.md')
    with open(paths['structured']) as f:
        assert json.load(f)['report_metadata']['name'] == 'demo'


def test_empty_report_is_stable():
    gen = ReportGenerator()
    first = gen.structured(build_report('scenario', 'empty', 1, []))
    assert first == gen.structured(build_report('scenario', 'empty', 1, []))
    assert json.loads(first)['report_data']['summary']['success']
    assert '## Tasks' in gen.human(build_report('scenario', 'empty', 1, []))


def test_version_only_touches_the_header(monkeypatch):
    before = build_report('scenario', 'v', 1, [{'index': 0, 'op': 'rank', 'status': 'value'}])
    monkeypatch.setattr(Config, 'TOOL_VERSION', '9.9.9')
    after = build_report('scenario', 'v', 1, [{'index': 0, 'op': 'rank', 'status': 'value'}])
    assert before['report_data'] == after['report_data']
    assert after['report_metadata']['tool_version'] == '9.9.9'
