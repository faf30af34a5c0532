import json

import pytest

from src.algebra.errors import ScenarioError
from src.scenarios.scenario import ObjectRegistry, Scenario, load_scenario, validate_scenario
from src.services.task_runner import Operations


def scenario(objects, tasks=None, characteristic=2):
    return Scenario.from_dict({'name': 't', 'field': {'characteristic': characteristic},
                               'objects': objects, 'tasks': tasks or []})


def paths(diagnostics):
    return [d.path for d in diagnostics]


def test_from_dict_rejects_bad_shapes():
    with pytest.raises(ScenarioError):
        Scenario.from_dict([1, 2])
    with pytest.raises(ScenarioError) as err:
        Scenario.from_dict({'field': {'characteristic': 'two'}})
    assert err.value.path == '$.field'
    with pytest.raises(ScenarioError) as err:
        Scenario.from_dict({'tasks': {}})
    assert err.value.path == '$.tasks'


def test_load_scenario_reports_json_position(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"name": "x",\n  "objects": }')
    with pytest.raises(ScenarioError) as err:
        load_scenario(str(path))
    assert 'invalid JSON at line 2' in err.value.message


def test_load_scenario_reads_file(tmp_path):
    path = tmp_path / 'ok.json'
    path.write_text(json.dumps({'name': 'ok', 'field': {'characteristic': 3}, 'seed': 9}))
    s = load_scenario(str(path))
    assert s.name == 'ok' and s.characteristic == 3 and s.seed == 9
    assert s.source == str(path)


def test_dangling_reference_and_unknown_kind():
    s = scenario({'M': {'kind': 'cofree', 'coalgebra': 'missing'},
                  'X': {'kind': 'spaceship'}})
    found = paths(validate_scenario(s, Operations()))
    assert '$.objects.M.coalgebra' in found
    assert '$.objects.X.kind' in found


def test_unknown_op_and_bad_expect():
    s = scenario({'C': {'kind': 'group_coalgebra', 'group': {'cyclic': 2}}},
                 [{'op': 'no_such_op', 'args': {}},
                  {'op': 'check_coalgebra', 'args': {'coalgebra': 'C'}, 'expect': 'maybe'},
                  {'op': 'check_coalgebra', 'args': {'coalgebra': 'D'}}])
    found = paths(validate_scenario(s, Operations()))
    assert '$.tasks[0].op' in found
    assert '$.tasks[1].expect' in found
    assert '$.tasks[2].args.coalgebra' in found


def test_axiom_failure_is_reported_on_the_object():
    # the generator acting by 0 cannot square to the identity
    s = scenario({'C': {'kind': 'group_coalgebra', 'group': {'cyclic': 2}},
                  'M': {'kind': 'comodule', 'coalgebra': 'C', 'operators': [[[1]], [[0]]]}})
    diagnostics = validate_scenario(s, Operations())
    assert paths(diagnostics) == ['$.objects.M']
    assert 'fails' in diagnostics[0].message


def test_valid_scenario_has_no_diagnostics():
    s = scenario({'C': {'kind': 'group_coalgebra', 'group': {'cyclic': 3}},
                  'F': {'kind': 'free_contra', 'coalgebra': 'C', 'dim': 2}},
                 [{'op': 'check_contramodule', 'args': {'contramodule': 'F'}, 'expect': 'pass'}])
    assert validate_scenario(s, Operations()) == []


def test_registry_memoizes():
    s = scenario({'C': {'kind': 'group_coalgebra', 'group': {'cyclic': 3}}})
    registry = ObjectRegistry(s)
    assert registry.get('C') is registry.get('C')


def test_circular_reference():
    s = scenario({'A': {'kind': 'cofree', 'coalgebra': 'B'},
                  'B': {'kind': 'trivial_comodule', 'coalgebra': 'A'}})
    with pytest.raises(ScenarioError) as err:
        ObjectRegistry(s).get('A')
    assert 'circular reference' in err.value.message


def test_tower_prime_must_match_field():
    s = scenario({'H': {'kind': 'tower', 'name': 'Zp', 'p': 3, 'depth': 3}})
    with pytest.raises(ScenarioError) as err:
        ObjectRegistry(s).get('H')
    assert err.value.path == '$.objects.H.p'


def test_unknown_object():
    with pytest.raises(ScenarioError):
        ObjectRegistry(scenario({})).get('nothing')
