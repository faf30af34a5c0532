import pytest

from src.algebra.errors import CheckResult, EngineError
from src.database.database import DatabaseManager
from src.services.fuzz_runner import (FAMILIES, PROPERTIES, FuzzRunner, check_artin_rees, check_coalgebra_axioms,
                                      run_fuzz, shrink_candidates)
from src.utils.generators import InstanceGenerator


def test_every_family_has_a_property():
    assert set(FAMILIES) == set(PROPERTIES)


def test_zero_count_is_an_empty_pass():
    summary = run_fuzz('adjunction', seed=1, count=0)['report_data']['summary']
    assert summary['total'] == 0
    assert summary['success']


def test_unknown_family():
    with pytest.raises(EngineError):
        FuzzRunner('nope')


def test_generator_is_seeded():
    a, b = InstanceGenerator(7), InstanceGenerator(7)
    assert [a.generate('theorem1') for _ in range(3)] == [b.generate('theorem1') for _ in range(3)]


def test_coalgebra_axioms_hold():
    report = run_fuzz('coalgebra-axioms', seed=2, count=4)
    assert report['report_data']['summary']['success']


def test_mutations_are_detected():
    report = run_fuzz('coalgebra-axioms', seed=2, count=6, mutate=True)
    assert report['report_data']['summary']['success']
    assert report['report_data']['mutation'] is True


def test_identity_slot_mutation_breaks_counitality():
    instance = {'characteristic': 2, 'group': {'cyclic': 2}, 'mutation': {'row': 1, 'col': 1, 'delta': 1}}
    verdict = check_coalgebra_axioms(instance)
    assert verdict
    assert verdict.witness['detected'] in ('counitality', 'coassociativity')


def test_artin_rees_closed_form():
    free = {'characteristic': 2, 'exponent': None, 'valuation': 2, 'tail': [1], 'depth': 8}
    assert check_artin_rees(free).witness['m'] == 2
    killed = {'characteristic': 3, 'exponent': 2, 'valuation': 3, 'tail': [], 'depth': 8}
    assert check_artin_rees(killed).witness['m'] == 0


@pytest.mark.parametrize('family', ['adjunction', 'theorem1', 'contratensor', 'artin-rees'])
def test_small_campaigns_pass(family):
    assert run_fuzz(family, seed=5, count=3)['report_data']['summary']['success']


def test_shrink_candidates_are_smaller():
    instance = {'characteristic': 2, 'depth': 4, 'p_exponents': [3, 1], 'q_exponents': [2]}
    candidates = shrink_candidates(instance)
    assert {'characteristic': 2, 'depth': 4, 'p_exponents': [1], 'q_exponents': [2]} in candidates
    assert {'characteristic': 2, 'depth': 4, 'p_exponents': [2, 1], 'q_exponents': [2]} in candidates
    assert {'characteristic': 2, 'depth': 4, 'p_exponents': [3, 1], 'q_exponents': [1]} in candidates


def test_runs_are_recorded(tmp_path):
    db = DatabaseManager(str(tmp_path / 'corpus.db'))
    run_fuzz('artin-rees', seed=4, count=2, db=db)
    run_fuzz('artin-rees', seed=4, count=2, db=db)
    runs = db.get_runs('artin-rees', 4)
    assert len(runs) == 2
    assert runs[0]['digest'] == runs[1]['digest']
    assert runs[0]['count'] == 2


@pytest.mark.parametrize('family,count', [
    ('coalgebra-axioms', 200),
    ('adjunction', 100),
    ('theorem1', 200),
    ('contratensor', 200),
    ('artin-rees', 200),
    ('derived-roundtrip', 60),
    ('sandbox-equivalence', 60),
])
def test_seeded_campaigns_pass(family, count):
    summary = run_fuzz(family, seed=11, count=count)['report_data']['summary']
    assert summary['total'] == count
    assert summary['success']


def test_shrunk_counterexample_is_seeded(monkeypatch):
    def fails_on_long_modules(instance):
        if sum(instance['p_exponents']) >= 3:
            return CheckResult.fail('planted', total=sum(instance['p_exponents']))
        return CheckResult.ok()

    monkeypatch.setitem(PROPERTIES, 'theorem1', fails_on_long_modules)
    first = run_fuzz('theorem1', seed=13, count=20)['report_data']['tasks']
    second = run_fuzz('theorem1', seed=13, count=20)['report_data']['tasks']
    shrunk = [t['shrunk'] for t in first if t['status'] == 'fail']
    assert shrunk
    assert shrunk == [t['shrunk'] for t in second if t['status'] == 'fail']
    for instance in shrunk:
        assert sum(instance['p_exponents']) == 3
