"""
Scenario files: a field, named object declarations and a task list.

Objects are built lazily by name and memoized, so every task that refers to
"C" sees the same coalgebra instance. Every diagnostic carries a JSON path
into the file.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from src.algebra.coalg import Coalgebra, check_coalgebra, from_structure_constants, group_function_coalgebra, path_coalgebra
from src.algebra.comod import LEFT, RIGHT, Comodule, check_comodule, cofree, cofree_right, trivial_comodule
from src.algebra.comod import from_operators as comodule_from_operators
from src.algebra.contramod import Contramodule, check_contramodule, free_contra, trivial_contramodule
from src.algebra.contramod import from_operators as contramodule_from_operators
from src.algebra.errors import CheckResult, EngineError, ScenarioError
from src.algebra.exactlin import Field, VecSpace
from src.algebra.groups import GroupTable, InvalidGroup, from_spec
from src.smooth.sandbox import Semialgebra, check_semialgebra, finite_sandbox, regular_module, sandbox_module, trivial_module
from src.smooth.smoothg import (SemidirectGroup, Window, build_G, g_contramodule, presented_contramodule, s_window,
                                smooth_module, t_window, trivial_object)
from src.towers.powerseries import TorsionModule
from src.towers.protower import PCModule, builtin_tower

logger = logging.getLogger(__name__)

OBJECT_KINDS = (
    'group_coalgebra', 'coalgebra', 'path_coalgebra',
    'cofree', 'trivial_comodule', 'comodule',
    'free_contra', 'trivial_contramodule', 'contramodule',
    'tower', 'pcmodule', 'torsion_module',
    'sandbox', 'sandbox_module',
    'semidirect', 'g_object',
)

# declaration keys that name other objects
REFERENCE_KEYS = ('coalgebra', 'sandbox', 'tower', 'module', 'semidirect')


@dataclass
class Diagnostic:
    path: str
    message: str
    witness: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out = {'path': self.path, 'message': self.message}
        if self.witness:
            out['witness'] = self.witness
        return out


@dataclass
class Scenario:
    name: str
    characteristic: int
    objects: Dict[str, Dict[str, Any]]
    tasks: List[Dict[str, Any]]
    seed: Optional[int] = None
    source: Optional[str] = None

    @property
    def field(self) -> Field:
        return Field(self.characteristic)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: Optional[str] = None) -> 'Scenario':
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a JSON object")
        spec = data.get('field', {'characteristic': 2})
        if not isinstance(spec, dict) or not isinstance(spec.get('characteristic'), int):
            raise ScenarioError("field needs an integer characteristic", '$.field')
        objects = data.get('objects', {})
        tasks = data.get('tasks', [])
        if not isinstance(objects, dict):
            raise ScenarioError("objects must be a mapping from names to declarations", '$.objects')
        if not isinstance(tasks, list):
            raise ScenarioError("tasks must be a list", '$.tasks')
        return cls(str(data.get('name', 'scenario')), spec['characteristic'], objects, tasks, data.get('seed'),
                   source)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except OSError as e:
        raise ScenarioError(f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}")
    return Scenario.from_dict(data, path)


class ObjectRegistry:
    """Builds declared objects on first use and memoizes them"""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.field = scenario.field
        self.logger = logging.getLogger(__name__)
        self._built: Dict[str, Any] = {}
        self._building: List[str] = []
        self._builders: Dict[str, Callable[[Dict[str, Any], str], Any]] = {
            'group_coalgebra': self._group_coalgebra,
            'coalgebra': self._coalgebra,
            'path_coalgebra': self._path_coalgebra,
            'cofree': self._cofree,
            'trivial_comodule': self._trivial_comodule,
            'comodule': self._comodule,
            'free_contra': self._free_contra,
            'trivial_contramodule': self._trivial_contramodule,
            'contramodule': self._contramodule,
            'tower': self._tower,
            'pcmodule': self._pcmodule,
            'torsion_module': self._torsion_module,
            'sandbox': self._sandbox,
            'sandbox_module': self._sandbox_module,
            'semidirect': self._semidirect,
            'g_object': self._g_object,
        }

    def get(self, name: str, path: str = '$') -> Any:
        if name in self._built:
            return self._built[name]
        if name not in self.scenario.objects:
            raise ScenarioError(f"unknown object '{name}'", path)
        if name in self._building:
            raise ScenarioError(f"circular reference through {' -> '.join(self._building + [name])}", path)
        decl = self.scenario.objects[name]
        decl_path = f"$.objects.{name}"
        if not isinstance(decl, dict) or decl.get('kind') not in self._builders:
            raise ScenarioError(f"kind must be one of {', '.join(OBJECT_KINDS)}", f"{decl_path}.kind")
        self._building.append(name)
        try:
            obj = self._builders[decl['kind']](decl, decl_path)
        except ScenarioError:
            raise
        except (EngineError, InvalidGroup, ValueError, KeyError, TypeError, IndexError) as e:
            raise ScenarioError(f"cannot build '{name}': {e}", decl_path)
        finally:
            self._building.pop()
        self.logger.debug(f"built object {name} ({decl['kind']})")
        self._built[name] = obj
        return obj

    def _ref(self, decl: Dict[str, Any], key: str, path: str, expected=None):
        if key not in decl:
            raise ScenarioError(f"missing reference '{key}'", path)
        obj = self.get(decl[key], f"{path}.{key}")
        if expected is not None and not isinstance(obj, expected):
            raise ScenarioError(f"'{decl[key]}' is not a {expected.__name__}", f"{path}.{key}")
        return obj

    def _group(self, spec, path: str) -> GroupTable:
        try:
            return from_spec(spec)
        except InvalidGroup as e:
            raise ScenarioError(str(e), path)

    def _group_coalgebra(self, decl, path) -> Coalgebra:
        return group_function_coalgebra(self._group(decl.get('group'), f"{path}.group"), self.field)

    def _coalgebra(self, decl, path) -> Coalgebra:
        return from_structure_constants(self.field, int(decl['dim']), decl.get('comult', []), decl['counit'],
                                        decl.get('labels'), decl.get('name', 'C'), decl.get('coaugmentation'))

    def _path_coalgebra(self, decl, path) -> Coalgebra:
        arrows = tuple(tuple(a) for a in decl.get('arrows', [[0, 1]]))
        return path_coalgebra(self.field, int(decl.get('vertices', 2)), arrows)

    def _cofree(self, decl, path) -> Comodule:
        c = self._ref(decl, 'coalgebra', path, Coalgebra)
        v = VecSpace.standard(self.field, int(decl.get('dim', 1)), 'v')
        return cofree_right(c, v) if decl.get('side', LEFT) == RIGHT else cofree(c, v)

    def _trivial_comodule(self, decl, path) -> Comodule:
        c = self._ref(decl, 'coalgebra', path, Coalgebra)
        return trivial_comodule(c, decl.get('side', LEFT), int(decl.get('dim', 1)))

    def _comodule(self, decl, path) -> Comodule:
        c = self._ref(decl, 'coalgebra', path, Coalgebra)
        ops = [self.field.matrix(op) for op in decl['operators']]
        return comodule_from_operators(c, ops, decl.get('side', LEFT), decl.get('name', 'M'))

    def _free_contra(self, decl, path) -> Contramodule:
        c = self._ref(decl, 'coalgebra', path, Coalgebra)
        return free_contra(c, VecSpace.standard(self.field, int(decl.get('dim', 1)), 'v'))

    def _trivial_contramodule(self, decl, path) -> Contramodule:
        c = self._ref(decl, 'coalgebra', path, Coalgebra)
        return trivial_contramodule(c, int(decl.get('dim', 1)))

    def _contramodule(self, decl, path) -> Contramodule:
        c = self._ref(decl, 'coalgebra', path, Coalgebra)
        ops = [self.field.matrix(op) for op in decl['operators']]
        return contramodule_from_operators(c, ops, decl.get('name', 'P'))

    def _tower(self, decl, path):
        p = int(decl.get('p', self.field.characteristic))
        if p != self.field.characteristic:
            raise ScenarioError(f"tower prime {p} differs from the field characteristic "
                                f"{self.field.characteristic}", f"{path}.p")
        return builtin_tower(decl.get('name', 'Zp'), p, int(decl.get('depth', 4)), decl.get('twist'))

    def _pcmodule(self, decl, path) -> PCModule:
        name = decl.get('name', 'P')
        if 'exponents' in decl or 'free_rank' in decl:
            return PCModule.from_exponents(self.field, decl.get('exponents', []), int(decl.get('free_rank', 0)), name)
        presentation = decl.get('presentation', [])
        generators = int(decl.get('generators', len(presentation) or 1))
        return PCModule(self.field, presentation, generators, name=name)

    def _torsion_module(self, decl, path) -> TorsionModule:
        return TorsionModule.from_exponents(self.field, [int(e) for e in decl['exponents']], decl.get('name', 'M'))

    def _sandbox(self, decl, path) -> Semialgebra:
        g = self._group(decl.get('group'), f"{path}.group")
        return finite_sandbox(g, decl.get('subgroup', [0]), self.field)

    def _sandbox_module(self, decl, path):
        s = self._ref(decl, 'sandbox', path, Semialgebra)
        if decl.get('preset') == 'regular':
            return regular_module(s)
        if decl.get('preset') == 'trivial':
            return trivial_module(s, int(decl.get('dim', 1)))
        return sandbox_module(s, decl['action'], decl.get('name', 'M'))

    def _semidirect(self, decl, path) -> SemidirectGroup:
        tower = self._ref(decl, 'tower', path)
        lo, hi = decl.get('window', [-2, 2])
        return build_G(tower, Window(int(lo), int(hi)))

    def _g_object(self, decl, path):
        group = self._ref(decl, 'semidirect', path, SemidirectGroup)
        preset = decl.get('preset')
        fld = self.field
        level = int(decl.get('level', 1))
        window = Window(*decl['window']) if 'window' in decl else None
        if preset == 's_window':
            return s_window(group, level, fld, window)
        if preset == 't_window':
            return t_window(group, level, fld, window)
        if preset in ('trivial_smooth', 'trivial_contra'):
            return trivial_object(group, fld, 'smooth' if preset == 'trivial_smooth' else 'contra')
        base = self.get(decl['module'], f"{path}.module")
        if isinstance(base, PCModule):
            return presented_contramodule(group, base, decl.get('gamma'), decl.get('name', base.name))
        gamma = decl.get('gamma') or fld.identity(base.dim)
        if decl.get('side', 'smooth') == 'smooth':
            return smooth_module(group, base, gamma, decl.get('name', base.name))
        return g_contramodule(group, base, gamma, decl.get('name', base.name))


def _axiom_check(obj) -> Optional[CheckResult]:
    if isinstance(obj, Coalgebra):
        return check_coalgebra(obj)
    if isinstance(obj, Comodule):
        return check_comodule(obj)
    if isinstance(obj, Contramodule):
        return check_contramodule(obj)
    if isinstance(obj, Semialgebra):
        return check_semialgebra(obj)
    if isinstance(obj, SemidirectGroup):
        return obj.relation_check()
    return None


def validate_scenario(scenario: Scenario, operations) -> List[Diagnostic]:
    """Schema, references and axiom pre-validation of every declared object"""
    diagnostics: List[Diagnostic] = []
    for name, decl in scenario.objects.items():
        path = f"$.objects.{name}"
        if not isinstance(decl, dict):
            diagnostics.append(Diagnostic(path, "declaration must be an object"))
            continue
        if decl.get('kind') not in OBJECT_KINDS:
            diagnostics.append(Diagnostic(f"{path}.kind", f"kind must be one of {', '.join(OBJECT_KINDS)}"))
            continue
        for key in REFERENCE_KEYS:
            ref = decl.get(key)
            if isinstance(ref, str) and ref not in scenario.objects:
                diagnostics.append(Diagnostic(f"{path}.{key}", f"dangling reference '{ref}'"))
    for i, task in enumerate(scenario.tasks):
        path = f"$.tasks[{i}]"
        if not isinstance(task, dict) or 'op' not in task:
            diagnostics.append(Diagnostic(path, "task needs an 'op'"))
            continue
        if task['op'] not in operations:
            diagnostics.append(Diagnostic(f"{path}.op", f"unknown operation '{task['op']}'"))
        for key, ref in operations.references(task).items():
            if ref not in scenario.objects:
                diagnostics.append(Diagnostic(f"{path}.args.{key}", f"dangling reference '{ref}'"))
        expect = task.get('expect', 'value')
        if expect not in ('pass', 'fail', 'value', 'error') and not isinstance(expect, dict):
            diagnostics.append(Diagnostic(f"{path}.expect", "expect must be pass, fail, value, error or an object"))
    if diagnostics:
        return diagnostics
    registry = ObjectRegistry(scenario)
    for name in scenario.objects:
        path = f"$.objects.{name}"
        try:
            obj = registry.get(name, path)
        except ScenarioError as e:
            diagnostics.append(Diagnostic(e.path, e.message))
            continue
        verdict = _axiom_check(obj)
        if verdict is not None and not verdict:
            diagnostics.append(Diagnostic(path, f"{verdict.axiom} fails", verdict.witness))
    logger.info(f"validated {scenario.name}: {len(diagnostics)} diagnostics")
    return diagnostics
