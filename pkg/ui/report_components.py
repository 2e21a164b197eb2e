import json
import logging
from typing import Dict, List

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

SCHEMA = 'finsler-report/1'

CHECK_COLUMNS = ['name', 'residual', 'tolerance', 'passed', 'samples', 'witness']
FLAG_COLUMNS = ['k_generic', 'k_closed', 'discrepancy', 'g_discrepancy', 'y2_norm', 'flags']


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def _fmt(value) -> str:
    return f"{value:.6g}"


def _witness(value) -> str:
    if value is None:
        return ''
    if isinstance(value, (list, tuple)):
        return '[' + ', '.join(_fmt(v) if isinstance(v, float) else str(v) for v in value) + ']'
    return str(value)


def checks_table(checks: List[Dict]) -> pd.DataFrame:
    df = pd.DataFrame(checks, columns=CHECK_COLUMNS)
    df['witness'] = df['witness'].map(_witness)
    df['passed'] = df['passed'].map(lambda ok: 'PASS' if ok else 'FAIL')
    return df


def flags_table(results: List[Dict]) -> pd.DataFrame:
    df = pd.DataFrame(results, columns=FLAG_COLUMNS)
    for col in FLAG_COLUMNS[:-1]:
        df[col] = pd.to_numeric(df[col], errors='coerce')
    df['flags'] = df['flags'].map(lambda flags: ', '.join(flags) if flags else '')
    return df


def render_json(report: Dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + '\n'


def render_text(report: Dict) -> str:
    lines = [f"{report.get('command', '?')}: {report.get('space', '')}"]
    if report.get('family'):
        lines.append(f"family: {report['family']['kind']} {report['family']['params']} "
                     f"(fingerprint {report.get('fingerprint', '')})")

    for key in ('verdicts', 'verdict'):
        if key in report:
            pairs = ', '.join(f"{name}={'T' if ok else 'F'}" for name, ok in sorted(report[key].items()))
            lines.append(f"{key}: {pairs}")
    for key in ('naturally_reductive', 'structural', 'agree', 'max_abs_k', 'near_singular'):
        if key in report:
            value = report[key]
            lines.append(f"{key}: {_fmt(value) if isinstance(value, float) else value}")

    if report.get('checks'):
        lines.append('')
        lines.append(checks_table(report['checks']).to_string(index=False, float_format=_fmt))
    if report.get('results'):
        lines.append('')
        lines.append(flags_table(report['results']).to_string(index=False, float_format=_fmt, na_rep='-'))
    if report.get('matrix') is not None:
        lines.append('')
        lines.append(pd.DataFrame(report['matrix']).to_string(float_format=_fmt))
    if 'error' in report:
        lines.append(f"error: {report['error']}")
    return '\n'.join(lines) + '\n'


def render_report(report: Dict, as_json: bool = False) -> str:
    return render_json(report) if as_json else render_text(report)
