"""
Command line front end for BeamPlan

Verbs: sweep, solve, compare, fit, check, synth, directivity, elements.
Exit codes: 0 success, 2 configuration / parse error, 3 numeric or
domain error.
"""

import argparse
import logging
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, replace
from typing import Dict, List, Optional, Sequence

from BeamPlan.antenna import (
    check_constraints,
    directivity_coefficients,
    directivity_from_coefficients,
)
from BeamPlan.app import VERSION, Settings, configure_logging
from BeamPlan.channel import (
    discretize_pas,
    fit_cluster,
    fitted_power,
    sigma_equivalent,
    synthesize_cluster,
    total_cluster_power,
)
from BeamPlan.exceptions import BeamPlanError, ConfigError, NoSolutionError, exit_code_for
from BeamPlan.models import ScenarioConfig, SynthesisConfig, UpaParameterSet
from BeamPlan.power import (
    IMPRACTICAL_ELEMENTS,
    beamwidth_grid,
    compare_ula_upa,
    comparison_summary,
    mw_to_dbm,
    percentile_beamwidth,
    percentile_scan,
    received_power,
    received_power_vs_elements,
    resolve_channel,
    sweep,
    ula_received_power,
)
from BeamPlan.rayfile import read_ray_file, write_ray_file
from BeamPlan.registry import channel_preset, get_parameter_set, list_parameter_sets
from BeamPlan.reports import (
    ELEMENTS_HEADER,
    SOLVE_HEADER,
    SOLVE_VERIFY_HEADER,
    build_manifest,
    write_comparison_csv,
    write_csv,
    write_json,
    write_manifest,
    write_sweep_csv,
)
from BeamPlan.scenario import DEFAULT_RANGE, load_scenario, parse_etas, parse_range

logger = logging.getLogger(__name__)

SET_CHOICES = ['1', '2', '3', '4', 'custom']
# Grid spacing used by `solve --verify`
VERIFY_STEP_DEG = 0.01


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _exact(args: argparse.Namespace, settings: Settings) -> bool:
    return bool(getattr(args, 'exact_eq13', False) or settings.exact_eq13)


def _default_scenario(exact: bool) -> ScenarioConfig:
    return ScenarioConfig(channel=channel_preset('conference'),
                          parameter_set=get_parameter_set(4, exact_eq13=exact))


def _scenario(args: argparse.Namespace, settings: Settings) -> ScenarioConfig:
    exact = _exact(args, settings)
    if args.scenario:
        scenario = load_scenario(args.scenario, exact_eq13=exact)
    else:
        scenario = _default_scenario(exact)
    if args.set:
        if args.set == 'custom':
            if scenario.parameter_set.id != 'custom':
                raise ConfigError('--set custom needs a scenario with [antenna] set = "custom"')
        else:
            scenario = replace(scenario, parameter_set=get_parameter_set(args.set, exact_eq13=exact))
    if getattr(args, 'eta', None):
        scenario = replace(scenario, etas=parse_etas(args.eta))
    if getattr(args, 'range', None):
        scenario = replace(scenario, sweep_range=parse_range(args.range))
    return scenario


def _scenario_parameters(scenario: ScenarioConfig, channel) -> Dict[str, object]:
    coeffs = directivity_coefficients(scenario.parameter_set)
    return {
        'parameter_set': asdict(scenario.parameter_set),
        'coefficients': asdict(coeffs),
        'channel_type': type(channel).__name__,
        'channel': asdict(channel),
        'phi0_deg': scenario.phi0_deg,
        'etas': list(scenario.etas),
        'sweep_range': list(scenario.sweep_range),
        'bin_width_deg': scenario.bin_width_deg,
        'wavelength_m': scenario.wavelength_m,
    }


def _finish(command: str, args: argparse.Namespace, outputs: List[str], parameters: Dict[str, object],
            settings: Settings) -> None:
    manifest = build_manifest(command, getattr(args, 'scenario', None), outputs, parameters)
    write_manifest(manifest, settings)
    for path in outputs:
        print(f'Wrote {path}')


def _fmt_dbm(power_mw: float) -> str:
    return f'{mw_to_dbm(power_mw):.3f} dBm'


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    scenario = _scenario(args, settings)
    channel = resolve_channel(scenario.channel, scenario.bin_width_deg)
    grid = beamwidth_grid(*scenario.sweep_range)
    workers = args.workers or settings.workers
    rows = sweep(scenario.parameter_set, channel, grid, workers=workers)
    path = write_sweep_csv(args.out, rows)
    parameters = _scenario_parameters(scenario, channel)
    parameters['workers'] = workers
    _finish('sweep', args, [path], parameters, settings)
    return 0


def cmd_solve(args: argparse.Namespace, settings: Settings) -> int:
    scenario = _scenario(args, settings)
    channel = resolve_channel(scenario.channel, scenario.bin_width_deg)
    parameter_set = scenario.parameter_set
    coeffs = directivity_coefficients(parameter_set)
    verify_grid = None
    if args.verify:
        top = min(coeffs.domain_max_deg - 1e-6, 360.0)
        verify_grid = beamwidth_grid(VERIFY_STEP_DEG, top, VERIFY_STEP_DEG)

    rows = []
    warnings_count = 0
    print(f'Set {parameter_set.id}: D = {coeffs.formula()}')
    for eta in scenario.etas:
        try:
            solution = percentile_beamwidth(parameter_set, channel, eta, scenario.phi0_deg)
        except NoSolutionError as exc:
            warnings_count += 1
            logger.warning('eta=%g: %s', eta, exc)
            print(f'eta={eta:g}: unreachable (floor {exc.floor:.4f})')
            row = [eta, None, None, None, None, None, None, 'unreachable']
            if verify_grid is not None:
                row += [None, None]
            rows.append(row)
            continue

        design = solution.design
        status = 'ok'
        if design.total_elements > IMPRACTICAL_ELEMENTS:
            status = 'impractical'
            warnings_count += 1
            logger.warning('eta=%g needs %d elements; flagged impractical', eta, design.total_elements)
        row = [eta, solution.beamwidth_deg, design.m_elements, design.n_elements, design.total_elements,
               solution.received_power_mw, mw_to_dbm(solution.received_power_mw), status]
        line = (f'eta={eta:g}: dphi={solution.beamwidth_deg:.4f} deg, M={design.m_elements}, '
                f'N={design.n_elements}, total={design.total_elements}, '
                f'P={_fmt_dbm(solution.received_power_mw)} [{status}]')
        if verify_grid is not None:
            scanned = percentile_scan(parameter_set, channel, eta, verify_grid)
            diff = abs(scanned - solution.beamwidth_deg)
            row += [scanned, diff]
            line += f' scan={scanned:.4f} (|diff|={diff:.2g})'
        rows.append(row)
        print(line)

    if warnings_count:
        print(f'{warnings_count} warning(s)')
    outputs = []
    if args.out:
        header = SOLVE_VERIFY_HEADER if verify_grid is not None else SOLVE_HEADER
        outputs.append(write_csv(args.out, header, rows))
    parameters = _scenario_parameters(scenario, channel)
    parameters['verify'] = bool(args.verify)
    _finish('solve', args, outputs, parameters, settings)
    return 0


def _stem(path: str) -> str:
    root, _ = os.path.splitext(path)
    return root


def cmd_compare(args: argparse.Namespace, settings: Settings) -> int:
    scenario = _scenario(args, settings)
    channel = resolve_channel(scenario.channel, scenario.bin_width_deg)
    parameter_set = scenario.parameter_set
    coeffs = directivity_coefficients(parameter_set)
    grid = beamwidth_grid(*scenario.sweep_range)

    curve_rows = []
    for dphi in grid:
        upa_mw = None
        if dphi <= coeffs.domain_max_deg:
            upa_mw = received_power(parameter_set, channel, dphi)
        ula_mw = ula_received_power(channel, dphi)
        curve_rows.append([dphi, upa_mw, None if upa_mw is None else mw_to_dbm(upa_mw),
                           ula_mw, mw_to_dbm(ula_mw)])
    table = compare_ula_upa(parameter_set, channel, scenario.etas, scenario.phi0_deg)
    summary = comparison_summary(parameter_set, channel, scenario.phi0_deg)

    curve_path = write_csv(args.out, ['delta_phi_deg', 'upa_received_power_mw', 'upa_received_power_dbm',
                                      'ula_received_power_mw', 'ula_received_power_dbm'], curve_rows)
    table_path = write_comparison_csv(f'{_stem(args.out)}_percentiles.csv', table)
    summary_data = {
        'upa_max_mw': summary.upa_max_mw,
        'ula_max_mw': summary.ula_max_mw,
        'max_to_max_gap_db': summary.max_gap_db,
        'upa_95': {'delta_phi_deg': summary.upa_95.beamwidth_deg, 'elements': summary.upa_95.elements},
        'upa_50': {'delta_phi_deg': summary.upa_50.beamwidth_deg, 'elements': summary.upa_50.elements},
        'ula_95': {'delta_phi_deg': summary.ula_95.beamwidth_deg, 'elements': summary.ula_95.elements},
        'upa_50_vs_ula_95_db': summary.upa_50_vs_ula_95_db,
        'note': summary.note,
    }
    summary_path = write_json(f'{_stem(args.out)}_summary.json', summary_data)

    print(f'UPA max {summary.upa_max_mw:.4g} mW, ULA max {summary.ula_max_mw:.4g} mW, '
          f'max-to-max gap {summary.max_gap_db:.2f} dB')
    print(f'UPA 95%: {summary.upa_95.beamwidth_deg:.3f} deg, {summary.upa_95.elements} elements')
    print(f'UPA 50%: {summary.upa_50.beamwidth_deg:.3f} deg, {summary.upa_50.elements} elements')
    print(f'ULA 95%: {summary.ula_95.beamwidth_deg:.3f} deg, {summary.ula_95.elements} elements')
    print(f'UPA 50% vs ULA 95%: {summary.upa_50_vs_ula_95_db:+.2f} dB')
    if summary.note:
        print(f'Note: {summary.note}')
    _finish('compare', args, [curve_path, table_path, summary_path],
            _scenario_parameters(scenario, channel), settings)
    return 0


def cmd_fit(args: argparse.Namespace, settings: Settings) -> int:
    cluster = read_ray_file(args.rays)
    fit = fit_cluster(cluster, args.bin_width)
    ray_power = total_cluster_power(cluster)
    integrated = fitted_power(fit)
    print(f'rays: {cluster.n_rays} diffuse, SAS {cluster.sas_deg:.3f} deg, '
          f'specular AoA {cluster.specular_aoa_deg:.3f} deg')
    print(f'u = {fit.u:.6g} mW/deg')
    print(f'x = {fit.x_deg:.4f} deg')
    print(f'v = {fit.v_deg:.4f} deg')
    print(f'sigma_r = {sigma_equivalent(fit):.4f} deg')
    print(f'fitted power = {integrated:.6g} mW ({_fmt_dbm(integrated)})')
    print(f'ray power = {ray_power:.6g} mW ({_fmt_dbm(ray_power)})')
    reference = cluster.metadata.get('reference_total_power_dbm')
    if reference is not None:
        print(f'reference power = {float(reference):.3f} dBm '
              f'(fit gap {mw_to_dbm(integrated) - float(reference):+.3f} dB)')

    outputs = []
    if args.out:
        samples = discretize_pas(cluster, args.bin_width)
        rows = [[a, d, fit.density(a)] for a, d in samples.as_pairs()]
        outputs.append(write_csv(args.out, ['angle_deg', 'density_mw_per_deg', 'fitted_density_mw_per_deg'],
                                 rows))
    parameters = {'rays': args.rays, 'bin_width_deg': args.bin_width, 'fit': asdict(fit)}
    _finish('fit', args, outputs, parameters, settings)
    return 0


def _custom_set(args: argparse.Namespace) -> UpaParameterSet:
    missing = [name for name in ('dphi_y', 'dtheta', 'theta0') if getattr(args, name) is None]
    if missing:
        raise ConfigError(f'custom set needs --{", --".join(m.replace("_", "-") for m in missing)}')
    return UpaParameterSet(id='custom', delta_phi_y_deg=args.dphi_y, delta_theta_deg=args.dtheta,
                           theta0_deg=args.theta0)


def cmd_check(args: argparse.Namespace, settings: Settings) -> int:
    if args.set_id == 'custom':
        parameter_set = _custom_set(args)
    else:
        parameter_set = get_parameter_set(args.set_id, exact_eq13=_exact(args, settings))
    report = check_constraints(parameter_set)

    def verdict(ok: bool) -> str:
        return 'PASS' if ok else 'FAIL'

    print(f'Set {parameter_set.id}: dphi_y={parameter_set.delta_phi_y_deg:g} deg, '
          f'dtheta={parameter_set.delta_theta_deg:g} deg, theta0={parameter_set.theta0_deg:g} deg')
    print(f'C1 {verdict(report.c1_pass)}  dphi_y = {report.delta_phi_y_deg:g} (limit 14.5)')
    print(f'C2 {verdict(report.c2_pass)}  dphi_y^2 - dtheta^2 cos^2 theta0 = {report.c2_value:.4g}')
    print(f'C3 {verdict(report.c3_pass)}  theta0 + dtheta/2 = {report.c3_sum_deg:g} (target 90)')
    try:
        coeffs = directivity_coefficients(parameter_set)
        print(f'D = {coeffs.formula()}, domain (0, {coeffs.domain_max_deg:.4g}]')
    except BeamPlanError as exc:
        print(f'D: {exc}')
    print('all constraints pass' if report.all_pass else f'failing: {", ".join(report.failures())}')
    return 0


def _synthesis_config(args: argparse.Namespace) -> SynthesisConfig:
    values: Dict[str, object] = {}
    if args.config:
        try:
            with open(args.config, 'rb') as handle:
                data = tomllib.load(handle)
        except OSError as exc:
            raise ConfigError(f'cannot read {args.config}: {exc.strerror or exc}')
        except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
            raise ConfigError(f'{args.config}: invalid TOML: {exc}')
        section = data.get('synth', data)
        known = set(SynthesisConfig.__dataclass_fields__) | {'peak_density'}
        unknown = sorted(set(section) - known)
        if unknown:
            raise ConfigError(f'[synth] unknown keys: {", ".join(unknown)}')
        values.update(section)

    flags = {
        'n_rays': args.n_rays, 'sas_deg': args.sas, 'envelope': args.envelope,
        'envelope_width_deg': args.width, 'peak_amplitude': args.peak_amplitude,
        'peak_density': args.peak_density, 'specular_amplitude': args.specular_amplitude,
        'specular_aoa_deg': args.aoa, 'seed': args.seed,
    }
    values.update({k: v for k, v in flags.items() if v is not None})

    peak_density = values.pop('peak_density', None)
    config = SynthesisConfig(**values)
    if peak_density is not None:
        config = replace(config, peak_amplitude=SynthesisConfig.peak_amplitude_for_density(
            float(peak_density), config.n_rays, config.sas_deg))
    return config


def cmd_synth(args: argparse.Namespace, settings: Settings) -> int:
    config = _synthesis_config(args)
    cluster = synthesize_cluster(config)
    path = write_ray_file(cluster, args.out, extra_metadata={'seed': config.seed, 'envelope': str(config.envelope)})
    power = total_cluster_power(cluster)
    print(f'{cluster.n_rays} rays over {cluster.sas_deg:.3f} deg, total power {power:.6g} mW ({_fmt_dbm(power)})')
    _finish('synth', args, [path], {'synthesis': asdict(config)}, settings)
    return 0


def cmd_directivity(args: argparse.Namespace, settings: Settings) -> int:
    grid = beamwidth_grid(*(parse_range(args.range) if args.range else DEFAULT_RANGE))
    sets = list_parameter_sets(exact_eq13=_exact(args, settings))
    coefficients = [directivity_coefficients(s) for s in sets]
    rows = []
    for dphi in grid:
        row: List[Optional[float]] = [dphi]
        for coeffs in coefficients:
            row.append(directivity_from_coefficients(coeffs, dphi) if dphi <= coeffs.domain_max_deg else None)
        rows.append(row)
    path = write_csv(args.out, ['delta_phi_deg'] + [f'set_{s.id}' for s in sets], rows)
    parameters = {'range': list(grid[:1] + grid[-1:]), 'sets': [asdict(s) for s in sets]}
    _finish('directivity', args, [path], parameters, settings)
    return 0


def cmd_elements(args: argparse.Namespace, settings: Settings) -> int:
    scenario = _scenario(args, settings)
    channel = resolve_channel(scenario.channel, scenario.bin_width_deg)
    grid = beamwidth_grid(*scenario.sweep_range)
    rows = received_power_vs_elements(scenario.parameter_set, channel, grid, scenario.phi0_deg)
    path = write_csv(args.out, ELEMENTS_HEADER, rows)
    _finish('elements', args, [path], _scenario_parameters(scenario, channel), settings)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _scenario_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument('--scenario', help='scenario TOML (default: set 4, 802.11ad conference room)')
    parent.add_argument('--set', choices=SET_CHOICES, help='parameter set overriding the scenario')
    parent.add_argument('--exact-eq13', action='store_true',
                        help='use computed directivity coefficients instead of tabulated ones')
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='beamplan', description='mmWave UPA beamwidth planner')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v info, -vv debug')
    parser.add_argument('--version', action='version', version=f'%(prog)s {VERSION}')
    sub = parser.add_subparsers(dest='command', required=True)
    scenario = _scenario_options()

    p = sub.add_parser('sweep', parents=[scenario], help='received power over a beamwidth range')
    p.add_argument('--range', help='lo:hi:step in degrees')
    p.add_argument('--workers', type=int, default=None, help='worker threads for the sweep')
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('solve', parents=[scenario], help='eta-percentile beamwidths and element counts')
    p.add_argument('--eta', help='comma separated fractions in (0, 1)')
    p.add_argument('--verify', action='store_true', help='cross-check each root with a grid scan')
    p.add_argument('--out')
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser('compare', parents=[scenario], help='UPA vs ULA comparison')
    p.add_argument('--eta', help='comma separated fractions in (0, 1)')
    p.add_argument('--range', help='lo:hi:step in degrees')
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('fit', help='Gaussian fit of a ray cluster')
    p.add_argument('rays', help='ray CSV file')
    p.add_argument('--bin-width', type=float, default=1.0, help='PAS bin width in degrees')
    p.add_argument('--out', help='optional CSV of binned and fitted densities')
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser('check', help='constraint report for a parameter set')
    p.add_argument('set_id', choices=SET_CHOICES)
    p.add_argument('--dphi-y', type=float)
    p.add_argument('--dtheta', type=float)
    p.add_argument('--theta0', type=float)
    p.add_argument('--exact-eq13', action='store_true')
    p.set_defaults(func=cmd_check)

    p = sub.add_parser('synth', help='synthesize a ray cluster CSV')
    p.add_argument('--config', help='TOML with a [synth] table')
    p.add_argument('--n-rays', type=int)
    p.add_argument('--sas', type=float, help='angle spread in degrees')
    p.add_argument('--envelope', choices=['gaussian', 'uniform', 'exponential'])
    p.add_argument('--width', type=float, help='envelope width in degrees')
    p.add_argument('--peak-amplitude', type=float)
    p.add_argument('--peak-density', type=float, help='target PAS peak in mW/deg')
    p.add_argument('--specular-amplitude', type=float)
    p.add_argument('--aoa', type=float, help='specular AoA in degrees')
    p.add_argument('--seed', type=int)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('directivity', help='directivity vs beamwidth for every registry set')
    p.add_argument('--range', help='lo:hi:step in degrees')
    p.add_argument('--exact-eq13', action='store_true')
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_directivity)

    p = sub.add_parser('elements', parents=[scenario], help='received power vs element count')
    p.add_argument('--range', help='lo:hi:step in degrees')
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_elements)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = Settings.from_env()
    if args.verbose:
        configure_logging(logging.DEBUG if args.verbose > 1 else logging.INFO)

    logger.info('beamplan %s: %s', VERSION, args.command)
    try:
        return args.func(args, settings)
    except BeamPlanError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return exit_code_for(exc)
