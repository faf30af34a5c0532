import os
import logging
import hashlib
import json
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from jinja2 import Template

from config.config import Config

MARKDOWN_TEMPLATE = '''# {{ title }}

- **Kind**: {{ meta.kind }}
- **Name**: {{ meta.name }}
- **Seed**: {{ meta.seed }}
- **Tool version**: {{ meta.tool_version }}
- **Outcome**: {% if summary.success %}PASS{% else %}FAIL{% endif %} ({{ summary.passed }} passed, {{ summary.failed }} failed, {{ summary.errors }} errors)

### Conventions
{% for key, value in meta.conventions | dictsort %}
- **{{ key }}**: `{{ value }}`
{% endfor %}

---

## Tasks

| # | Operation | Expect | Status | Detail |
|---|-----------|--------|--------|--------|
{% for row in task_rows.itertuples() %}
| {{ row.index }} | {{ row.op }} | {{ row.expect }} | {{ row.status }} | {{ row.detail }} |
{% endfor %}

{% if tables %}
---

## Homology tables
{% for table in tables %}

### Task {{ table.index }}: {{ table.op }}{% if table.label %} ({{ table.label }}){% endif %}

| Degree | Dimension |
|--------|-----------|
{% for row in table.frame.itertuples() %}
| {{ row.degree }} | {{ row.dim }} |
{% endfor %}
{% endfor %}
{% endif %}

{% if failures %}
---

## Failures
{% for f in failures %}
- **{{ f.label }}**: {{ f.detail }}
{% endfor %}
{% endif %}

---

*Report generated by coalgebra-engine v{{ meta.tool_version }}*
'''


def to_plain(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars and arrays to ints and lists, fractions to strings"""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if hasattr(obj, 'to_dict'):
        return to_plain(obj.to_dict())
    return obj


def build_report(kind: str, name: str, seed: int, tasks: List[Dict[str, Any]],
                 extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """A report in declaration order; pass-type tasks decide the outcome"""
    passed = sum(1 for t in tasks if t.get('status') == 'pass')
    failed = sum(1 for t in tasks if t.get('status') == 'fail')
    errors = sum(1 for t in tasks if t.get('status') == 'error')
    data = {
        'tasks': tasks,
        'summary': {'total': len(tasks), 'passed': passed, 'failed': failed, 'errors': errors,
                    'success': failed == 0 and errors == 0},
    }
    if extra:
        data.update(extra)
    return to_plain({
        'report_metadata': {
            'kind': kind,
            'name': name,
            'seed': seed,
            'tool_version': Config.TOOL_VERSION,
            'conventions': Config.CONVENTIONS,
        },
        'report_data': data,
    })


class ReportGenerator:
    """Structured and human-readable renderings of a run report"""

    def __init__(self, output_dir: Optional[str] = None):
        self.output_dir = output_dir or Config.REPORT_OUTPUT_DIR
        self.logger = logging.getLogger(__name__)

    def structured(self, report: Dict[str, Any]) -> str:
        """Byte-stable JSON: sorted keys, fixed indentation, no clock values"""
        return json.dumps(to_plain(report), sort_keys=True, indent=2, ensure_ascii=False) + '\n'

    def digest(self, report: Dict[str, Any]) -> str:
        return hashlib.sha256(self.structured(report).encode('utf-8')).hexdigest()

    def homology_tables(self, report: Dict[str, Any]) -> List[Dict[str, Any]]:
        """Every homology dimension table in the report, one DataFrame per table, rows in degree order"""
        tables = []
        for task in report['report_data'].get('tasks', []):
            result = task.get('result') or {}
            for label, dims in self._homology_entries(result):
                frame = pd.DataFrame(
                    [{'degree': int(d), 'dim': v if isinstance(v, str) else int(v)} for d, v in dims.items()],
                    columns=['degree', 'dim'],
                )
                frame = frame.sort_values('degree').reset_index(drop=True)
                tables.append({'index': task.get('index'), 'op': task.get('op'), 'label': label, 'frame': frame})
        return tables

    def _homology_entries(self, result: Dict[str, Any]):
        if isinstance(result.get('homology'), dict):
            yield '', result['homology']
        for key, value in sorted(result.items()):
            if isinstance(value, dict) and isinstance(value.get('homology'), dict):
                yield key, value['homology']

    def human(self, report: Dict[str, Any]) -> str:
        meta = report['report_metadata']
        data = report['report_data']
        tasks = data.get('tasks', [])
        task_rows = pd.DataFrame(
            [{'index': t.get('index'), 'op': t.get('op', t.get('family', '')), 'expect': t.get('expect', ''),
              'status': t.get('status'), 'detail': self._detail(t)} for t in tasks],
            columns=['index', 'op', 'expect', 'status', 'detail'],
        )
        failures = [{'label': f"{t.get('index')} {t.get('op', '')}", 'detail': self._detail(t)}
                    for t in tasks if t.get('status') in ('fail', 'error')]
        template = Template(MARKDOWN_TEMPLATE, trim_blocks=True, lstrip_blocks=True)
        return template.render(
            title=f"{meta['kind'].title()} report: {meta['name']}",
            meta=meta,
            summary=data['summary'],
            task_rows=task_rows,
            tables=self.homology_tables(report),
            failures=failures,
        )

    def _detail(self, task: Dict[str, Any]) -> str:
        if task.get('error'):
            return str(task['error']).replace('|', '/')
        result = task.get('result') or {}
        if isinstance(result, dict) and result.get('axiom'):
            witness = json.dumps(result.get('witness', {}), sort_keys=True)
            return f"{result['axiom']} {witness}".replace('|', '/')
        if isinstance(result, dict) and 'value' in result:
            return json.dumps(result['value'], sort_keys=True).replace('|', '/')
        return ''

    def render(self, report: Dict[str, Any], fmt: str = 'structured') -> str:
        if fmt == 'structured':
            return self.structured(report)
        if fmt == 'human':
            return self.human(report)
        raise ValueError(f"unknown report format {fmt}")

    def write(self, report: Dict[str, Any], out: Optional[str] = None, formats=('structured', 'human')) -> Dict[str, str]:
        """Write the requested renderings; out names the structured file, the markdown sits next to it"""
        meta = report['report_metadata']
        base = out or os.path.join(self.output_dir, f"{meta['kind']}_{meta['name']}_{meta['seed']}.json")
        stem, _ = os.path.splitext(base)
        directory = os.path.dirname(base)
        if directory:
            os.makedirs(directory, exist_ok=True)
        paths = {}
        for fmt in formats:
            path = base if fmt == 'structured' else f"{stem}.md"
            with open(path, 'w', encoding='utf-8') as f:
                f.write(self.render(report, fmt))
            paths[fmt] = path
            self.logger.info(f"{fmt} report written to {path}")
        return paths
