import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import toml

from modules.errors import ConfigError, DomainError, SpaceFileError
from modules.homogeneous import HomogeneousSpace
from modules.lie_core import LieData
from modules.norms import FAMILIES, make_family
from settings import DEFAULTS

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

TOP_KEYS = ('format_version', 'name', 'labels', 'dim_h', 'dim_m1', 'dim_m2',
            'structure', 'gram', 'norm', 'tolerances')
REQUIRED_KEYS = ('format_version', 'name', 'dim_h', 'dim_m1', 'dim_m2', 'structure', 'gram', 'norm')
NORM_KEYS = ('family', 'params')
STRUCTURE_KEYS = ('i', 'j', 'k', 'value')


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def validate_header(doc: Dict) -> Tuple[bool, str]:
    unknown = sorted(set(doc) - set(TOP_KEYS))
    if unknown:
        return False, f"Unknown top-level keys: {', '.join(unknown)}"
    missing = [key for key in REQUIRED_KEYS if key not in doc]
    if missing:
        return False, f"Missing required keys: {', '.join(missing)}"
    if doc['format_version'] != FORMAT_VERSION:
        return False, f"Unsupported format_version {doc['format_version']!r}, expected {FORMAT_VERSION}"
    if not isinstance(doc['name'], str) or not doc['name'].strip():
        return False, "name must be a non-empty string"
    for key in ('dim_h', 'dim_m1', 'dim_m2'):
        if not _is_int(doc[key]) or doc[key] < 0:
            return False, f"{key} must be a non-negative integer"
    return True, ""


def validate_structure(entries, total: int) -> Tuple[bool, str]:
    if not isinstance(entries, list):
        return False, "structure must be an array of tables"
    for pos, entry in enumerate(entries):
        if not isinstance(entry, dict):
            return False, f"structure entry {pos} is not a table"
        unknown = sorted(set(entry) - set(STRUCTURE_KEYS))
        if unknown:
            return False, f"structure entry {pos} has unknown keys: {', '.join(unknown)}"
        missing = [key for key in STRUCTURE_KEYS if key not in entry]
        if missing:
            return False, f"structure entry {pos} is missing {', '.join(missing)}"
        for key in ('i', 'j', 'k'):
            if not _is_int(entry[key]) or not 0 <= entry[key] < total:
                return False, f"structure entry {pos}: {key} must be an integer in 0..{total - 1}"
        if not _is_number(entry['value']):
            return False, f"structure entry {pos}: value must be a number"
    return True, ""


def validate_gram(gram, dim_m: int) -> Tuple[bool, str]:
    if not isinstance(gram, list) or len(gram) != dim_m:
        return False, f"gram must have {dim_m} rows"
    for row in gram:
        if not isinstance(row, list) or len(row) != dim_m or not all(_is_number(x) for x in row):
            return False, f"every gram row must hold {dim_m} numbers"
    return True, ""


def validate_norm(norm) -> Tuple[bool, str]:
    if not isinstance(norm, dict):
        return False, "norm must be a table"
    unknown = sorted(set(norm) - set(NORM_KEYS))
    if unknown:
        return False, f"Unknown [norm] keys: {', '.join(unknown)}"
    if norm.get('family') not in FAMILIES:
        return False, f"norm.family must be one of {', '.join(sorted(FAMILIES))}"
    params = norm.get('params', [])
    if not isinstance(params, list) or not all(_is_number(p) for p in params):
        return False, "norm.params must be an array of numbers"
    return True, ""


def validate_tolerances(table) -> Tuple[bool, str]:
    if not isinstance(table, dict):
        return False, "tolerances must be a table"
    unknown = sorted(set(table) - set(DEFAULTS))
    if unknown:
        return False, f"Unknown settings in [tolerances]: {', '.join(unknown)}"
    return True, ""


def validate_document(doc: Dict) -> Tuple[bool, str]:
    ok, msg = validate_header(doc)
    if not ok:
        return ok, msg
    total = doc['dim_h'] + doc['dim_m1'] + doc['dim_m2']
    dim_m = doc['dim_m1'] + doc['dim_m2']
    if 'labels' in doc:
        labels = doc['labels']
        if not isinstance(labels, list) or len(labels) != total or not all(isinstance(x, str) for x in labels):
            return False, f"labels must be {total} strings"
    for ok, msg in (validate_structure(doc['structure'], total),
                    validate_gram(doc['gram'], dim_m),
                    validate_norm(doc['norm']),
                    validate_tolerances(doc.get('tolerances', {}))):
        if not ok:
            return ok, msg
    return True, ""


def parse_text(text: str) -> Dict:
    try:
        return toml.loads(text)
    except toml.TomlDecodeError as e:
        raise SpaceFileError(e.msg, line=e.lineno) from e


def locate_line(text: str, msg: str) -> Optional[int]:
    """Best-effort line number for a validation message: the offending [[structure]] header or key."""
    entry = re.match(r'structure entry (\d+)', msg)
    if entry:
        headers = [n for n, line in enumerate(text.splitlines(), 1) if re.match(r'\s*\[\[\s*structure\s*\]\]', line)]
        pos = int(entry.group(1))
        return headers[pos] if pos < len(headers) else None
    unknown = re.match(r'Unknown top-level keys: (\w+)', msg)
    key = unknown.group(1) if unknown else next((k for k in TOP_KEYS if re.search(rf'\b{k}\b', msg)), None)
    if key is None:
        return None
    pattern = re.compile(rf'\s*(\[\s*{re.escape(key)}\s*\]|{re.escape(key)}\s*=)')
    return next((n for n, line in enumerate(text.splitlines(), 1) if pattern.match(line)), None)


def space_from_document(doc: Dict, grid: Optional[int] = None) -> Tuple[HomogeneousSpace, Dict]:
    """Build the space and return it with the [tolerances] overrides of the file."""
    ok, msg = validate_document(doc)
    if not ok:
        raise SpaceFileError(msg)

    triples = [(e['i'], e['j'], e['k'], e['value']) for e in doc['structure']]
    try:
        data = LieData.from_triples(doc['dim_h'], doc['dim_m1'], doc['dim_m2'], triples, doc.get('labels'))
        family = make_family(doc['norm']['family'], doc['norm'].get('params'))
        space = HomogeneousSpace.build(doc['name'], data, np.array(doc['gram'], dtype=float), family,
                                       grid=grid or DEFAULTS['admissibility_grid'])
    except (DomainError, ConfigError) as e:
        raise SpaceFileError(str(e)) from e
    return space, dict(doc.get('tolerances', {}))


def load_space(path, grid: Optional[int] = None) -> Tuple[HomogeneousSpace, Dict]:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise SpaceFileError(f"Cannot read {path}: {e.strerror}") from e
    doc = parse_text(text)
    try:
        space, tolerances = space_from_document(doc, grid)
    except SpaceFileError as e:
        if e.line is not None:
            raise
        raise SpaceFileError(str(e), line=locate_line(text, str(e))) from e
    logger.info(f"Loaded space '{space.name}' from {path}")
    return space, tolerances


def space_to_document(space: HomogeneousSpace, tolerances: Optional[Dict] = None) -> Dict:
    data = space.data
    structure: List[Dict] = [
        {'i': int(i), 'j': int(j), 'k': int(k), 'value': float(v)} for i, j, k, v in data.structure
    ]
    doc = {
        'format_version': FORMAT_VERSION,
        'name': space.name,
        'labels': list(data.labels),
        'dim_h': data.dim_h,
        'dim_m1': data.dim_m1,
        'dim_m2': data.dim_m2,
        'gram': [[float(x) for x in row] for row in space.ip.gram],
        'norm': {'family': space.norm.family.kind, 'params': list(space.norm.family.params)},
        'structure': structure,
    }
    if tolerances:
        doc['tolerances'] = dict(tolerances)
    return doc


def export_space(space: HomogeneousSpace, path=None, tolerances: Optional[Dict] = None) -> str:
    text = toml.dumps(space_to_document(space, tolerances))
    if path is not None:
        Path(path).write_text(text, encoding='utf-8')
        logger.info(f"Exported '{space.name}' to {path}")
    return text
