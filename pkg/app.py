import argparse
import logging
import sys
from typing import Dict, List, Optional, Tuple

import numpy as np

from modules import catalog, curvature, homogeneous, lie_core, norms
from modules.errors import ConfigError, FinslerError, NotNaturallyReductiveError
from settings import DEFAULTS, resolve_settings
from space_data import export_space, load_space
from ui.report_components import SCHEMA, render_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

TOLERANCE_FLAGS = ('tol_struct', 'tol_nr', 'tol_s', 'tol_e', 'tol_xcheck', 'eps_sing')


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s',
                        stream=sys.stderr, force=True)


def parse_vector(text: Optional[str]) -> Optional[np.ndarray]:
    if text is None:
        return None
    try:
        return np.array([float(part) for part in text.split(',')])
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a comma-separated list of numbers")


def _load(path, cli: Optional[Dict]) -> Tuple[homogeneous.HomogeneousSpace, Dict]:
    space, file_overrides = load_space(path)
    settings = resolve_settings(file_overrides, cli)
    if settings['admissibility_grid'] != space.norm.grid:
        space = homogeneous.HomogeneousSpace.build(space.name, space.data, space.ip.gram,
                                                   space.norm.family, grid=settings['admissibility_grid'])
    return space, settings


def base_report(command: str, space: homogeneous.HomogeneousSpace, settings: Dict) -> Dict:
    return {
        'schema': SCHEMA,
        'command': command,
        'space': space.name,
        'family': space.norm.family.describe(),
        'fingerprint': norms.fingerprint(space.norm.family),
        'settings': dict(settings),
        'checks': [],
    }


def _audit_gate(space, settings, report) -> bool:
    """Run the structural audit; on failure put its records in the report."""
    audit = lie_core.audit(space.data, space.ip, settings['tol_struct'])
    if not audit['passed']:
        failed = [c['name'] for c in audit['checks'] if not c['passed']]
        logger.error(f"{space.name}: input failed the structural audit ({', '.join(failed)})")
        report['checks'] = audit['checks']
    return audit['passed']


def cmd_validate(path, cli: Optional[Dict] = None) -> Tuple[int, Dict]:
    space, settings = _load(path, cli)
    report = base_report('validate', space, settings)
    audit = lie_core.audit(space.data, space.ip, settings['tol_struct'])
    family = norms.family_audit(space.norm.family, tol=settings['tol_struct'])
    report['checks'] = audit['checks'] + family['checks'] + [space.norm.admissibility]
    passed = all(c['passed'] for c in report['checks'])
    report['passed'] = passed
    return (EXIT_OK if passed else EXIT_FAILED), report


def cmd_nr(path, cli: Optional[Dict] = None) -> Tuple[int, Dict]:
    space, settings = _load(path, cli)
    report = base_report('nr', space, settings)
    if not _audit_gate(space, settings, report):
        return EXIT_FAILED, report
    verdict = homogeneous.nr_verdict(space, settings)
    report.update(verdict)
    ok = verdict['agree'] and verdict['naturally_reductive']
    return (EXIT_OK if ok else EXIT_FAILED), report


def cmd_scurv(path, cli: Optional[Dict] = None, y=None) -> Tuple[int, Dict]:
    space, settings = _load(path, cli)
    report = base_report('scurv', space, settings)
    if not _audit_gate(space, settings, report):
        return EXIT_FAILED, report
    args = (settings['seed'], settings['tol_s'], settings['workers'])
    checks = [homogeneous.s_sampled_check(space, settings['samples'], *args)]
    checks += homogeneous.s_block_check(space, max(50, settings['samples'] // 4), *args)
    checks.append(homogeneous.s_parity_check(space, settings['samples'], *args))
    checks += homogeneous.s_vanishing_structural(space, settings['tol_struct'])['checks']
    report['checks'] = checks
    if y is not None:
        report['value'] = homogeneous.s_curvature(space, y)
    passed = all(c['passed'] for c in checks)
    report['passed'] = passed
    return (EXIT_OK if passed else EXIT_FAILED), report


def cmd_ecurv(path, cli: Optional[Dict] = None, y=None) -> Tuple[int, Dict]:
    space, settings = _load(path, cli)
    report = base_report('ecurv', space, settings)
    if not _audit_gate(space, settings, report):
        return EXIT_FAILED, report
    if y is not None:
        matrix = homogeneous.e_curvature(space, y)
        residual = float(np.max(np.abs(matrix)))
        report['matrix'] = matrix.tolist()
        report['checks'] = [lie_core.check_record('e_vanishes', residual, settings['tol_e'], samples=1,
                                                  witness=np.asarray(y, dtype=float).tolist())]
    else:
        report['checks'] = [homogeneous.e_sampled_check(space, homogeneous.e_sample_count(settings['samples']),
                                                        settings['seed'], settings['tol_e'], settings['workers'])]
    passed = all(c['passed'] for c in report['checks'])
    report['passed'] = passed
    return (EXIT_OK if passed else EXIT_FAILED), report


def cmd_flag(path, cli: Optional[Dict] = None, y=None, v=None, sweep: Optional[int] = None,
             min_y2: float = 0.0) -> Tuple[int, Dict]:
    if (y is None) != (v is None):
        raise ConfigError("A single flag needs both y and v")
    space, settings = _load(path, cli)
    report = base_report('flag', space, settings)
    if not _audit_gate(space, settings, report):
        return EXIT_FAILED, report
    if y is not None and v is not None:
        flags = [curvature.orthonormalize_flag(space, y, v)]
    else:
        flags = curvature.random_flags(space, sweep or 100, settings['seed'], min_y2)
    sweep_report = curvature.flag_sweep(space, flags, settings)
    report.update(sweep_report)
    return (EXIT_OK if sweep_report['passed'] else EXIT_FAILED), report


def cmd_audit_equiv(path, cli: Optional[Dict] = None) -> Tuple[int, Dict]:
    space, settings = _load(path, cli)
    report = base_report('audit-equiv', space, settings)
    if not _audit_gate(space, settings, report):
        return EXIT_FAILED, report
    audit = homogeneous.equivalence_audit(space, settings)
    report.update(audit)
    ok = audit['agree'] and all(audit['verdict'].values())
    return (EXIT_OK if ok else EXIT_FAILED), report


def cmd_export(fixture: str, out=None, family: Optional[str] = None,
               params: Optional[List[float]] = None) -> Tuple[int, Dict]:
    chosen = norms.make_family(family, params) if family else None
    space = catalog.build_fixture(fixture, chosen)
    text = export_space(space, out)
    report = base_report('export', space, dict(DEFAULTS))
    report['path'] = str(out) if out else None
    report['document'] = text
    return EXIT_OK, report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='finsler', description="Homogeneous (alpha1, alpha2) Finsler geometry checks")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--json', action='store_true', help="Print the machine-readable report")
    common.add_argument('--verbose', action='store_true')
    common.add_argument('--quiet', action='store_true')

    analysis = argparse.ArgumentParser(add_help=False, parents=[common])
    analysis.add_argument('file', help="Space description (TOML)")
    analysis.add_argument('--seed', type=int)
    analysis.add_argument('--samples', type=int)
    analysis.add_argument('--workers', type=int)
    for name in TOLERANCE_FLAGS:
        analysis.add_argument('--' + name.replace('_', '-'), dest=name, type=float)

    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('validate', parents=[analysis], help="Structural audit and admissibility")
    sub.add_parser('nr', parents=[analysis], help="Natural reductiveness, three ways")
    scurv = sub.add_parser('scurv', parents=[analysis], help="S-curvature checks")
    scurv.add_argument('--y', type=parse_vector)
    ecurv = sub.add_parser('ecurv', parents=[analysis], help="E-curvature checks")
    ecurv.add_argument('--y', type=parse_vector)
    flag = sub.add_parser('flag', parents=[analysis], help="Flag curvature, closed form against definition")
    flag.add_argument('--y', type=parse_vector)
    flag.add_argument('--v', type=parse_vector)
    flag.add_argument('--sweep', type=int)
    flag.add_argument('--min-y2', dest='min_y2', type=float, default=0.0)
    sub.add_parser('audit-equiv', parents=[analysis], help="S/E vanishing equivalence audit")

    export = sub.add_parser('export', parents=[common], help="Write a catalog fixture as TOML")
    export.add_argument('fixture', choices=sorted(catalog.FIXTURES))
    export.add_argument('--out')
    export.add_argument('--family', choices=sorted(norms.FAMILIES))
    export.add_argument('--params', type=parse_vector)
    return parser


def _cli_overrides(args: argparse.Namespace) -> Dict:
    keys = ('seed', 'samples', 'workers') + TOLERANCE_FLAGS
    return {key: getattr(args, key) for key in keys if getattr(args, key, None) is not None}


def run(args: argparse.Namespace) -> Tuple[int, Dict]:
    if args.command == 'export':
        params = None if args.params is None else args.params.tolist()
        return cmd_export(args.fixture, args.out, args.family, params)

    cli = _cli_overrides(args)
    if args.command == 'validate':
        return cmd_validate(args.file, cli)
    if args.command == 'nr':
        return cmd_nr(args.file, cli)
    if args.command == 'scurv':
        return cmd_scurv(args.file, cli, args.y)
    if args.command == 'ecurv':
        return cmd_ecurv(args.file, cli, args.y)
    if args.command == 'flag':
        return cmd_flag(args.file, cli, args.y, args.v, args.sweep, args.min_y2)
    return cmd_audit_equiv(args.file, cli)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == 'flag' and (args.y is None) != (args.v is None):
        parser.error("flag: --y and --v must be given together")
    configure_logging(args.verbose, args.quiet)

    try:
        code, report = run(args)
    except NotNaturallyReductiveError as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED
    except FinslerError as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == 'export' and not args.json and not args.out:
        sys.stdout.write(report['document'])
    else:
        sys.stdout.write(render_report(report, args.json))
    return code


if __name__ == '__main__':
    sys.exit(main())
