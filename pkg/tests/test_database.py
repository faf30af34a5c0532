import pytest

from src.database.database import DatabaseManager


@pytest.fixture
def db(tmp_path):
    return DatabaseManager(str(tmp_path / 'nested' / 'corpus.db'))


def test_runs_and_previous_digest(db):
    assert db.previous_digest('demo', 1) is None
    first = db.save_run('scenario', 'demo', 1, 'aaa', True)
    db.save_run('scenario', 'demo', 1, 'bbb', False)
    db.save_run('scenario', 'demo', 2, 'ccc', True)
    assert first is not None
    assert db.previous_digest('demo', 1) == 'bbb'
    assert [r['digest'] for r in db.get_runs('demo')] == ['aaa', 'bbb', 'ccc']
    assert [r['digest'] for r in db.get_runs('demo', 2)] == ['ccc']


def test_counterexamples(db):
    run_id = db.save_run('fuzz', 'adjunction', 5, 'x', False, 10)
    instance = {'characteristic': 2, 'group': {'cyclic': 2}}
    assert db.save_counterexample(run_id, 'adjunction', 5, 3, instance, 'adjunction', 2)
    # same family, seed and index replaces the row
    assert db.save_counterexample(run_id, 'adjunction', 5, 3, instance, 'adjunction', 4)
    rows = db.get_counterexamples('adjunction')
    assert len(rows) == 1
    assert rows[0]['instance'] == instance
    assert rows[0]['shrink_steps'] == 4
    assert db.get_counterexamples('theorem1') == []
