"""
Command-line interface for gapscope.
Runs one subcommand per invocation, writes CSV/JSON artifacts and exits with
0 on success, 1 on a computational inconsistency, 2 on a usage error.
"""

import argparse
import logging
import math
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

from joblib import Parallel, delayed
from tqdm import tqdm

from arithmetic import coverage_regime, beta_estimate
from cocycle import SchrodingerCocycle, lyapunov_exponent, parabolic, rotation_number
from config import BUTTERFLY_PHASES, KAM_DEMO, TOOL_VERSION
from errors import GapscopeError, InconsistencyError, UsageError
from gaps import detect_gaps, dry_martini_check, duality_check
from kam import contraction_table
from reports import header_line, render_csv, render_json, write_artifacts
from result_cache import ResultCache, cache_key
from run_config import RunConfig, build_run_config
from spectrum import SpectrumParams, ids as sturm_ids, ids_from_rotation, rational_spectrum, spectrum_intervals

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('lyap', 'rot', 'ids', 'spectrum', 'gaps', 'dry-check', 'duality', 'kam-step', 'butterfly')

Artifacts = Dict[str, str]


def _butterfly_bands(task: Tuple[float, int, int, int]) -> List[Tuple[float, float, float]]:
    lam, p, q, phases = task
    return [(p / q, lo, hi) for lo, hi in rational_spectrum(lam, p, q, phases)]


class GapscopeApp:
    """Runs subcommands for one RunConfig and reports status dictionaries."""

    def __init__(self, config: RunConfig, cache: Optional[ResultCache] = None):
        """
        Initialize the application.

        Args:
            config: resolved run configuration
            cache: result cache (defaults to config['cache_dir'], honouring --no-cache)
        """
        self.config = config
        self.cache = cache or ResultCache(config['cache_dir'], enabled=config.use_cache)
        self.header = header_line(config.subcommand, config.canonical())

    @property
    def params(self) -> SpectrumParams:
        """Budget for grid scans."""
        c = self.config
        return SpectrumParams(n_iter=c['scan_iters'], n_phases=c['phases'], seed=c['seed'], ids_size=c['n'])

    @property
    def probe_params(self) -> SpectrumParams:
        """Budget for pointwise rotation and UH probes."""
        c = self.config
        return SpectrumParams(n_iter=c['iters'], n_phases=c['phases'], seed=c['seed'], ids_size=c['n'])

    def _csv(self, columns, rows) -> str:
        return render_csv(self.header, columns, rows)

    def _json(self, payload: Dict[str, Any]) -> str:
        return render_json(self.header, payload)

    def lyap(self) -> Tuple[Artifacts, str]:
        c = self.config
        cocycle = SchrodingerCocycle(c.lam, c['E'], c.alpha, c['epsilon'])
        value = lyapunov_exponent(cocycle, c['iters'], c['phases'], c['seed'])
        payload = {
            'lambda': c.lam,
            'E': c['E'],
            'epsilon': c['epsilon'],
            'lyapunov': value,
            'prediction_on_spectrum': max(0.0, c['epsilon'] + math.log(c.lam)),
        }
        return {'lyap.json': self._json(payload)}, f"L = {value:.6f}"

    def rot(self) -> Tuple[Artifacts, str]:
        c = self.config
        result = rotation_number(SchrodingerCocycle(c.lam, c['E'], c.alpha), c.alpha, c['iters'])
        payload = {
            'lambda': c.lam,
            'E': c['E'],
            'rotation_number': result.value,
            'raw': result.raw,
            'window_gap': result.window_gap,
            'converged': result.converged,
            'ids': 1.0 - 2.0 * result.value,
        }
        note = '' if result.converged else ' (not converged)'
        return {'rot.json': self._json(payload)}, f"rho = {result.value:.6f}{note}"

    def ids(self) -> Tuple[Artifacts, str]:
        c = self.config
        sturm = float(sturm_ids(c.lam, c.alpha, c['E'], c['n'], c['phases'], c['seed']))
        rotation = ids_from_rotation(c.lam, c.alpha, c['E'], c['iters'])
        payload = {'lambda': c.lam, 'E': c['E'], 'ids_sturm': sturm, 'ids_rotation': rotation,
                   'difference': abs(sturm - rotation)}
        return {'ids.json': self._json(payload)}, f"N = {sturm:.6f} (rotation {rotation:.6f})"

    def spectrum(self) -> Tuple[Artifacts, str]:
        c = self.config
        scan = spectrum_intervals(c.lam, c.alpha, params=self.params, step=c['grid'])
        payload = scan.to_dict()
        payload['regime'] = coverage_regime(beta_estimate(c.alpha), c.lam)
        payload['johnson_agreement'] = scan.johnson_agreement()
        artifacts = {
            'spectrum_grid.csv': self._csv(['E', 'member', 'margin', 'ids'], scan.csv_rows()),
            'spectrum.json': self._json(payload),
        }
        return artifacts, (f"{len(scan.intervals)} spectral intervals, "
                           f"Johnson agreement {payload['johnson_agreement']:.3f}")

    def gaps(self) -> Tuple[Artifacts, str]:
        c = self.config
        scan = spectrum_intervals(c.lam, c.alpha, params=self.params, step=c['grid'])
        found = detect_gaps(scan, alpha=c.alpha)
        artifacts = {
            'spectrum_intervals.csv': self._csv(['e_lower', 'e_upper'], scan.intervals),
            'gaps.json': self._json({'lambda': c.lam, 'alpha': c.alpha.to_dict(),
                                     'grid_step': scan.step, 'gaps': [g.to_dict() for g in found]}),
        }
        return artifacts, f"{len(found)} labelled gaps"

    def dry_check(self) -> Tuple[Artifacts, str]:
        c = self.config
        if c.lam == 1:
            raise UsageError("dry-check covers the non-critical couplings lambda != 1 only", flag='--lambda')
        report = dry_martini_check(c.lam, c.alpha, c['kmax'], c['grid'], params=self.probe_params)
        columns = ['k', 'found', 'status', 'e_minus', 'e_plus', 'width', 'ids', 'residual']
        artifacts = {
            'dry_check.json': self._json(report.to_dict()),
            'dry_check.csv': self._csv(columns, report.csv_rows()),
        }
        opened = sum(e.found for e in report.entries)
        return artifacts, f"{opened}/{len(report.entries)} labels open, all_open={report.all_open}"

    def duality(self) -> Tuple[Artifacts, str]:
        c = self.config
        if c.lam <= 1:
            raise UsageError(f"duality needs lambda > 1, got {c.lam:g}", flag='--lambda')
        report = duality_check(c.lam, c.alpha, c['grid'], self.params)
        return ({'duality.json': self._json(report.to_dict())},
                f"Hausdorff {report.hausdorff:.2e}, IDS discrepancy {report.ids_discrepancy:.2e}")

    def kam_step(self) -> Tuple[Artifacts, str]:
        c = self.config
        norms = (10.0 * c['norm'], c['norm'], 0.1 * c['norm'])
        table = contraction_table(parabolic(KAM_DEMO['d']), c.alpha, c['qnext'], norms,
                                  KAM_DEMO['modes'], c['seed'])
        if table.exponent < KAM_DEMO['target_exponent']:
            raise InconsistencyError(f"fitted contraction exponent {table.exponent:.3f} below "
                                     f"{KAM_DEMO['target_exponent']}", 'quadratic-contraction')
        columns = ['norm', 'remainder', 'remainder_over_norm_sq', 'solution_ratio', 'homological_residual']
        artifacts = {
            'kam_contraction.csv': self._csv(columns, table.csv_rows()),
            'kam_contraction.json': self._json({'exponent': table.exponent, 'q_next': table.q_next,
                                                'd': KAM_DEMO['d'], 'modes': list(KAM_DEMO['modes'])}),
        }
        return artifacts, f"fitted contraction exponent {table.exponent:.3f}"

    def butterfly(self) -> Tuple[Artifacts, str]:
        c = self.config
        tasks = [(c.lam, p, q, BUTTERFLY_PHASES)
                 for q in range(1, c['max_q'] + 1) for p in range(q) if math.gcd(p, q) == 1]
        rows: List[Tuple[float, float, float]] = []
        if c['workers'] > 1:
            results = Parallel(n_jobs=c['workers'], prefer='processes', return_as='generator')(
                delayed(_butterfly_bands)(task) for task in tasks)
            for bands in tqdm(results, total=len(tasks), desc='butterfly', file=sys.stderr):
                rows.extend(bands)
        else:
            for task in tqdm(tasks, desc='butterfly', file=sys.stderr):
                rows.extend(_butterfly_bands(task))
        csv_text = self._csv(['alpha', 'e_lower', 'e_upper'], rows)
        return {'butterfly.csv': csv_text}, f"{len(rows)} bands over {len(tasks)} frequencies"

    def _handler(self) -> Callable[[], Tuple[Artifacts, str]]:
        return getattr(self, self.config.subcommand.replace('-', '_'))

    def run(self) -> Dict[str, Any]:
        """
        Run the configured subcommand, using the cache when possible.

        Returns:
            {'status': 'success'|'error', 'message': str, 'data': {...}}
        """
        key = cache_key(self.config.subcommand, self.config.canonical())
        try:
            entry = self.cache.get(key)
            if entry is not None:
                artifacts, message, cached = entry.payload['artifacts'], entry.payload['message'], True
            else:
                artifacts, message = self._handler()()
                self.cache.put(key, {'artifacts': artifacts, 'message': message})
                cached = False
            paths = write_artifacts(self.config['output'], artifacts)
            return {
                'status': 'success',
                'message': message,
                'data': {'paths': [str(p) for p in paths], 'cached': cached, 'exit_code': 0},
            }
        except GapscopeError as e:
            data = {'exit_code': e.exit_code}
            if getattr(e, 'flag', None):
                data['flag'] = e.flag
            if getattr(e, 'invariant', None):
                data['invariant'] = e.invariant
            return {'status': 'error', 'message': str(e), 'data': data}
        except OSError as e:
            return {'status': 'error', 'message': f"cannot write artifacts: {e}", 'data': {'exit_code': 1}}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON config file (also GAPSCOPE_CONFIG)')
    common.add_argument('--verbose', action='store_true', help='Debug logging')
    common.add_argument('--no-cache', action='store_true', help='Ignore and do not write the result cache')
    common.add_argument('--workers', type=int, help='Worker processes for sweeps')
    common.add_argument('--lambda', type=float, help='Coupling lambda > 0')
    common.add_argument('--alpha', help="Frequency: golden, silver, 0.41, 13/21 or '[1,2,2]'")
    common.add_argument('--E', type=float, help='Energy')
    common.add_argument('--epsilon', type=float, help='Imaginary phase shift')
    common.add_argument('--grid', type=float, help='Energy grid step')
    common.add_argument('--n', type=int, help='Truncation size for Sturm IDS')
    common.add_argument('--iters', type=int, help='Cocycle iterations for lyap, rot, ids and dry-check')
    common.add_argument('--scan-iters', type=int, help='UH iterations per grid point in scans')
    common.add_argument('--phases', type=int, help='Phase samples')
    common.add_argument('--seed', type=int, help='Phase jitter seed')
    common.add_argument('--kmax', type=int, help='Largest gap label')
    common.add_argument('--max-q', type=int, help='Butterfly denominator bound')
    common.add_argument('--norm', type=float, help='kam-step perturbation size')
    common.add_argument('--qnext', type=int, help='kam-step convergent denominator')
    common.add_argument('--output', help='Artifact directory')
    common.add_argument('--cache-dir', help='Cache directory (also GAPSCOPE_CACHE_DIR)')

    parser = argparse.ArgumentParser(
        description='gapscope - spectra, gaps and cocycles of the almost Mathieu operator'
    )
    sub = parser.add_subparsers(dest='subcommand', required=True)
    helps = {
        'lyap': 'Lyapunov exponent at (lambda, E, epsilon)',
        'rot': 'Fibered rotation number at E',
        'ids': 'Integrated density of states at E',
        'spectrum': 'Spectrum scan over an energy grid',
        'gaps': 'Detect and label spectral gaps',
        'dry-check': 'Check that every gap with |k| <= kmax is open',
        'duality': 'Compare lambda * Sigma_(1/lambda) with Sigma_lambda',
        'kam-step': 'One KAM Newton step contraction table',
        'butterfly': 'Band edges over rational frequencies p/q, q <= max-q',
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _configure_logging(verbose: bool):
    level = 'DEBUG' if verbose else os.environ.get('GAPSCOPE_LOG_LEVEL', 'WARNING').upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the application."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    flags = {k: v for k, v in vars(args).items() if k not in ('subcommand', 'config', 'verbose', 'no_cache')}

    try:
        config = build_run_config(args.subcommand, flags, config_path=args.config, use_cache=not args.no_cache)
    except GapscopeError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return e.exit_code

    print("\n" + "="*50)
    print(f"gapscope {TOOL_VERSION} - {args.subcommand}")
    for line in config.banner_lines():
        print(line)
    print("="*50 + "\n")

    result = GapscopeApp(config).run()
    if result['status'] == 'success':
        cached = ' (cached)' if result['data']['cached'] else ''
        print(f"  ✓ {result['message']}{cached}")
        for path in result['data']['paths']:
            print(f"    {path}")
    else:
        print(f"  ✗ {result['message']}", file=sys.stderr)
    return result['data']['exit_code']


if __name__ == "__main__":
    sys.exit(main())
