import copy
import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from config.config import Config
from src.algebra import coalg, comod, contramod, corr
from src.algebra.errors import CheckResult, EngineError
from src.algebra.exactlin import Field, VecSpace
from src.algebra.groups import from_spec
from src.algebra.reps import spin
from src.database.database import DatabaseManager
from src.reports.report_generator import ReportGenerator, build_report
from src.smooth import sandbox, smoothg
from src.towers.powerseries import TorsionModule
from src.towers.protower import PCModule, artin_rees_number, builtin_tower, contratensor_comparison, \
    dense_subring_hom_check
from src.utils.generators import InstanceGenerator, build_action, smaller_groups

FAMILIES = ('coalgebra-axioms', 'adjunction', 'theorem1', 'contratensor', 'artin-rees', 'derived-roundtrip',
            'sandbox-equivalence')


def _whole_group_sandbox(instance: Dict[str, Any], fld: Field):
    g = from_spec(instance['group'])
    return sandbox.finite_sandbox(g, list(range(g.order)), fld)


def check_coalgebra_axioms(instance: Dict[str, Any]) -> CheckResult:
    """Without a mutation every checker passes; with one, the coalgebra checker must reject"""
    fld = Field(instance['characteristic'])
    c = coalg.group_function_coalgebra(from_spec(instance['group']), fld)
    mutation = instance.get('mutation')
    if mutation:
        n = c.dim
        mutant = coalg.with_comult_entry(c, mutation['row'] % (n * n), mutation['col'] % n, mutation['delta'])
        verdict = coalg.check_coalgebra(mutant)
        if verdict:
            return CheckResult.fail('mutation undetected', **mutation)
        return CheckResult.ok(detected=verdict.axiom)
    for verdict in (coalg.check_coalgebra(c),
                    coalg.check_algebra(coalg.dual_algebra(c)),
                    comod.check_comodule(comod.regular(c)),
                    contramod.check_contramodule(contramod.free_contra(c, VecSpace.standard(fld, 1, 'v')))):
        if not verdict:
            return verdict
    return CheckResult.ok(dim=c.dim)


def check_adjunction(instance: Dict[str, Any]) -> CheckResult:
    fld = Field(instance['characteristic'])
    s = _whole_group_sandbox(instance, fld)
    g = s.group
    twist = instance.get('twist_seed')
    n_action = build_action(g, instance['n'], fld, twist)
    p_action = build_action(g, instance['p'], fld, None if twist is None else twist + 1)
    n = comod.from_operators(s.coalgebra, [n_action[h] for h in s.subgroup], comod.RIGHT, 'N')
    p = sandbox.SandboxModule(s, tuple(p_action), 'P').contramodule
    return contramod.adjunction_check(n, p, VecSpace.standard(fld, instance['v_dim'], 'v'))


def _zp_tower(instance: Dict[str, Any]):
    return builtin_tower('Zp', instance['characteristic'], instance['depth'])


def check_theorem1(instance: Dict[str, Any]) -> CheckResult:
    fld = Field(instance['characteristic'])
    p = TorsionModule.from_exponents(fld, instance['p_exponents'], 'P')
    q = TorsionModule.from_exponents(fld, instance['q_exponents'], 'Q')
    return dense_subring_hom_check(p, q, _zp_tower(instance))


def check_contratensor(instance: Dict[str, Any]) -> CheckResult:
    fld = Field(instance['characteristic'])
    n = TorsionModule.from_exponents(fld, instance['n_exponents'], 'N')
    p = TorsionModule.from_exponents(fld, instance['p_exponents'], 'P')
    return contratensor_comparison(n, p, _zp_tower(instance))


def check_artin_rees(instance: Dict[str, Any]) -> CheckResult:
    """Against the closed form for N = t^v M in M = k[[t]] or k[[t]]/t^e: m = v unless N = 0"""
    fld = Field(instance['characteristic'])
    exponent, v = instance['exponent'], instance['valuation']
    module = PCModule.free(fld, 1, 'R') if exponent is None else PCModule.from_exponents(fld, [exponent], 0, 'M')
    generator = [[0] * v + [1] + list(instance['tail'])]
    result = artin_rees_number(module, [generator], instance['depth'])
    expected = v if exponent is None or v < exponent else 0
    if result.m != expected:
        return CheckResult.fail('artin-rees number', expected=expected, got=result.m)
    return CheckResult.ok(m=result.m)


def _coalgebra_level_object(instance: Dict[str, Any], fld: Field):
    c = coalg.path_coalgebra(fld)
    rank = instance['rank']
    ambient = comod.cofree(c, VecSpace.standard(fld, rank, 'v')) if instance['kind'] == 'comodule' \
        else contramod.free_contra(c, VecSpace.standard(fld, rank, 'v'))
    if not instance['generators']:
        return ambient
    rng = np.random.default_rng(instance['vector_seed'])
    vectors = fld.matrix(rng.integers(0, fld.characteristic, size=(ambient.dim, instance['generators'])).tolist(),
                         (ambient.dim, instance['generators']))
    basis = spin(ambient.rep, vectors)
    if basis.shape[1] == 0 or basis.shape[1] == ambient.dim:
        return ambient
    if instance['mode'] == 'sub':
        sub = comod.subcomodule if instance['kind'] == 'comodule' else contramod.subcontramodule
        return sub(ambient, basis)
    quotient = comod.quotient_comodule if instance['kind'] == 'comodule' else contramod.quotient_contramodule
    return quotient(ambient, basis)[0]


def check_derived_roundtrip(instance: Dict[str, Any], cap: int = Config.DEFAULT_CAP) -> CheckResult:
    fld = Field(instance['characteristic'])
    if instance['level'] == 'coalgebra':
        return corr.derived_round_trip(_coalgebra_level_object(instance, fld), cap)
    group = smoothg.build_G(_zp_tower(instance))
    base = TorsionModule.from_exponents(fld, instance['exponents'], 'M')
    gamma = fld.identity(base.dim)
    power = fld.identity(base.dim)
    for c in instance['gamma']:
        power = fld.matmul(power, base.t)
        gamma = fld.add(gamma, fld.scale(fld.scalar(c), power))
    build = smoothg.smooth_module if instance['kind'] == 'smooth' else smoothg.g_contramodule
    obj = build(group, base, gamma, 'M')
    cert = smoothg.derived_equivalence_G(obj, cap, instance['kind'])
    if cert.support[1] - cert.support[0] > 1:
        return CheckResult.fail('support width', support=list(cert.support))
    return cert.round_trip


def check_sandbox_equivalence(instance: Dict[str, Any]) -> CheckResult:
    fld = Field(instance['characteristic'])
    g = from_spec(instance['group'])
    s = sandbox.finite_sandbox(g, instance['subgroup'], fld)
    m = sandbox.SandboxModule(s, tuple(build_action(g, instance['pieces'], fld, instance.get('twist_seed'))), 'M')
    return sandbox.sandbox_equivalence(m, instance['kind'])


PROPERTIES: Dict[str, Callable[[Dict[str, Any]], CheckResult]] = {
    'coalgebra-axioms': check_coalgebra_axioms,
    'adjunction': check_adjunction,
    'theorem1': check_theorem1,
    'contratensor': check_contratensor,
    'artin-rees': check_artin_rees,
    'derived-roundtrip': check_derived_roundtrip,
    'sandbox-equivalence': check_sandbox_equivalence,
}


def shrink_candidates(instance: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Strictly simpler neighbours of an instance, simplest first"""
    out = []

    def variant(key, value):
        smaller = copy.deepcopy(instance)
        smaller[key] = value
        out.append(smaller)

    if instance.get('twist_seed') is not None:
        variant('twist_seed', None)
    for key in ('n', 'p', 'pieces'):
        items = instance.get(key)
        if isinstance(items, list) and len(items) > 1:
            for i in range(len(items)):
                variant(key, items[:i] + items[i + 1:])
    for key in ('p_exponents', 'q_exponents', 'n_exponents', 'exponents'):
        items = instance.get(key)
        if not isinstance(items, list):
            continue
        if len(items) > 1:
            for i in range(len(items)):
                variant(key, items[:i] + items[i + 1:])
        for i, e in enumerate(items):
            if e > 1:
                variant(key, sorted(items[:i] + [e - 1] + items[i + 1:], reverse=True))
    for key in ('tail', 'gamma'):
        items = instance.get(key)
        if isinstance(items, list) and items:
            variant(key, items[:-1])
    for key, floor in (('v_dim', 1), ('rank', 1), ('generators', 0), ('valuation', 0)):
        if isinstance(instance.get(key), int) and instance[key] > floor:
            variant(key, instance[key] - 1)
    if 'group' in instance and 'subgroup' not in instance:
        for spec in smaller_groups(instance['group']):
            variant('group', spec)
    return out


class FuzzRunner:
    """Seeded property campaign over one family, with greedy shrinking and an optional corpus"""

    def __init__(self, family: str, seed: int = Config.DEFAULT_SEED, count: int = Config.DEFAULT_COUNT,
                 mutate: bool = False, cap: int = Config.DEFAULT_CAP, db: Optional[DatabaseManager] = None):
        if family not in PROPERTIES:
            raise EngineError(f"unknown fuzz family {family}, expected one of {FAMILIES}")
        self.family = family
        self.seed = seed
        self.count = count
        self.mutate = mutate
        self.cap = cap
        self.db = db
        self.generator = InstanceGenerator(seed)
        self.logger = logging.getLogger(__name__)

    def evaluate(self, instance: Dict[str, Any]) -> Tuple[str, Dict[str, Any]]:
        """('pass' | 'fail' | 'error', detail) for one instance"""
        try:
            if self.family == 'derived-roundtrip':
                verdict = check_derived_roundtrip(instance, self.cap)
            else:
                verdict = PROPERTIES[self.family](instance)
        except (EngineError, ValueError) as e:
            return 'error', {'error': f"{type(e).__name__}: {e}"}
        return ('pass' if verdict else 'fail'), verdict.to_dict()

    def shrink(self, instance: Dict[str, Any], status: str) -> Tuple[Dict[str, Any], Dict[str, Any], int]:
        current, detail = instance, {}
        steps = 0
        while steps < Config.MAX_SHRINK_STEPS:
            for candidate in shrink_candidates(current):
                outcome, candidate_detail = self.evaluate(candidate)
                if outcome == status:
                    current, detail = candidate, candidate_detail
                    steps += 1
                    break
            else:
                break
        return current, detail, steps

    def run(self) -> Dict[str, Any]:
        self.logger.info(f"Fuzzing {self.family}: seed {self.seed}, {self.count} instances"
                         f"{' with mutation' if self.mutate else ''}")
        tasks = []
        for index in range(self.count):
            instance = self.generator.generate(self.family, self.mutate)
            status, detail = self.evaluate(instance)
            entry = {'index': index, 'family': self.family, 'op': self.family, 'status': status}
            if status != 'pass':
                shrunk, shrunk_detail, steps = self.shrink(instance, status)
                entry.update({'instance': instance, 'shrunk': shrunk, 'shrink_steps': steps,
                              'result': shrunk_detail or detail})
                if 'error' in (shrunk_detail or detail):
                    entry['error'] = (shrunk_detail or detail)['error']
                self.logger.warning(f"{self.family} instance {index} {status}, shrunk in {steps} steps")
            tasks.append(entry)
        report = build_report('fuzz', self.family, self.seed, tasks,
                              {'count': self.count, 'mutation': self.mutate})
        self._record(report, tasks)
        return report

    def _record(self, report: Dict[str, Any], tasks: List[Dict[str, Any]]):
        if self.db is None:
            return
        digest = ReportGenerator().digest(report)
        previous = self.db.previous_digest(self.family, self.seed)
        if previous and previous != digest:
            self.logger.warning(f"{self.family} seed {self.seed}: report differs from the corpus run")
        run_id = self.db.save_run('fuzz', self.family, self.seed, digest, report['report_data']['summary']['success'],
                                  self.count)
        for t in tasks:
            if t['status'] != 'pass':
                self.db.save_counterexample(run_id, self.family, self.seed, t['index'], t['shrunk'],
                                            t.get('result', {}).get('axiom'), t['shrink_steps'])


def run_fuzz(family: str, seed: int = Config.DEFAULT_SEED, count: int = Config.DEFAULT_COUNT, mutate: bool = False,
             cap: int = Config.DEFAULT_CAP, db: Optional[DatabaseManager] = None) -> Dict[str, Any]:
    return FuzzRunner(family, seed, count, mutate, cap, db).run()
