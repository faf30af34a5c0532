from pathlib import Path

import pytest

from src.reports.report_generator import ReportGenerator
from src.scenarios.scenario import Scenario, load_scenario
from src.services.task_runner import Operations, run_scenario

SCENARIOS = sorted((Path(__file__).parent.parent / 'scenarios').glob('*.json'))


def inline(tasks, characteristic=2):
    return Scenario.from_dict({
        'name': 'inline',
        'field': {'characteristic': characteristic},
        'seed': 3,
        'objects': {
            'C': {'kind': 'group_coalgebra', 'group': {'cyclic': 2}},
            'T': {'kind': 'trivial_comodule', 'coalgebra': 'C'},
        },
        'tasks': tasks,
    })


@pytest.mark.parametrize('path', SCENARIOS, ids=lambda p: p.stem)
def test_bundled_scenarios_pass(path):
    report = run_scenario(load_scenario(str(path)))
    summary = report['report_data']['summary']
    assert summary['errors'] == 0
    assert summary['success'], [t for t in report['report_data']['tasks'] if t['status'] in ('fail', 'error')]


def test_reports_are_deterministic():
    scenario = load_scenario(str(SCENARIOS[0]))
    generator = ReportGenerator()
    assert generator.digest(run_scenario(scenario)) == generator.digest(run_scenario(scenario))


def test_expectations():
    report = run_scenario(inline([
        {'op': 'rank', 'args': {'matrix': [[1, 1], [1, 1]]}, 'expect': {'value': 1}},
        {'op': 'is_conilpotent', 'args': {'coalgebra': 'C'}, 'expect': 'pass'},
        {'op': 'phi_psi_unit_counit', 'args': {'object': 'T'}, 'expect': 'error'},
        {'op': 'cogenerator_space', 'args': {'coalgebra': 'C'}},
    ]))
    tasks = report['report_data']['tasks']
    assert [t['status'] for t in tasks] == ['pass', 'pass', 'pass', 'value']
    assert 'PreconditionError' in tasks[2]['error']
    assert report['report_data']['summary']['success']


def test_semisimple_coalgebra_is_not_conilpotent():
    report = run_scenario(inline([{'op': 'is_conilpotent', 'args': {'coalgebra': 'C'}, 'expect': 'fail'}], 3))
    assert report['report_data']['tasks'][0]['status'] == 'pass'


def test_unexpected_error_fails_the_run():
    report = run_scenario(inline([{'op': 'phi_psi_unit_counit', 'args': {'object': 'T'}, 'expect': 'pass'}]))
    assert report['report_data']['tasks'][0]['status'] == 'error'
    assert not report['report_data']['summary']['success']


def test_expected_error_that_does_not_happen_fails():
    report = run_scenario(inline([{'op': 'rank', 'args': {'matrix': [[1]]}, 'expect': 'error'}]))
    assert report['report_data']['tasks'][0]['status'] == 'fail'


def test_invalid_scenario_reports_diagnostics():
    report = run_scenario(inline([{'op': 'no_such_op'}]))
    data = report['report_data']
    assert not data['summary']['success']
    assert data['diagnostics'][0]['path'] == '$.tasks[0].op'


def test_operations_references():
    ops = Operations()
    assert 'rank' in ops and 'nonsense' not in ops
    assert ops.references({'op': 'psi', 'args': {'comodule': 'M', 'cap': 3}}) == {'comodule': 'M'}
