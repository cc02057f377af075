# Authors: selfnormlab contributors
#
# License: 3-clause BSD
"""
The `selfnormlab` command.

    selfnormlab run CONFIG [--jobs N] [--dump] [-v|-q] [--key=value ...]
    selfnormlab sample MODEL N [--seed S] [--out FILE]
    selfnormlab path --alpha A [--p P] [--c C] [--gamma G] [--epsilon E] [--grid-size K] [--seed S] [--out FILE]
    selfnormlab an MODEL [--n N ...] [--out FILE]
    selfnormlab report FILE

Exit codes: 0 all verdicts pass, 1 a verdict fails, 2 configuration error, 3 hypothesis violation, 4 numerical
failure.
"""
import argparse
import hashlib
import os
import sys
from collections import OrderedDict
from logging import DEBUG, INFO, WARNING
from time import perf_counter

try:  # python 3.5+
    from typing import Any, Dict, List, Sequence
except ImportError:
    pass

import pandas as pd
from autoclass import autodict

from .config import ConfigError, ConfigTemplateSyntaxError, load_run_config
from .doa_models import UnknownModel, sample_iid
from .experiments import HypothesisViolation, coherence_checks, run_all
from .io_utils import default_logger, read_json, render_table, write_csv, write_json
from .levy_sim import DEFAULT_EPSILON, DEFAULT_GRID_SIZE, ResourceError, limit_spec_for, simulate_path
from .norming import NormingError, NormingOverflow, norming_table
from .rng import RandomSource
from .selfnorm import DegenerateSample
from .stable_laws import NumericalFailure
from .stats import GeneratorFailure


EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_NUMERICAL = 4

MANIFEST_NAME = 'manifest.json'

CONFIG_ERRORS = (ConfigError, ConfigTemplateSyntaxError, UnknownModel, ResourceError)
NUMERICAL_ERRORS = (NumericalFailure, NormingError, NormingOverflow, DegenerateSample)


def _get_version():
    from selfnormlab import __version__
    return __version__


@autodict
class RunManifest:
    """
    A summary of a `run`: which configuration was run (with the sha256 of its contents), with which tool version, the
    verdict of each experiment block with the path of its report, and the coherence checks between blocks.
    """
    def __init__(self,
                 version,       # type: str
                 config_path,   # type: str
                 config_hash,   # type: str
                 seed,          # type: int
                 experiments,   # type: List[str]
                 verdicts,      # type: Dict[str, str]
                 reports,       # type: Dict[str, str]
                 wall_clock,    # type: float
                 coherence=None  # type: List[Dict[str, Any]]
                 ):
        self.version = version
        self.config_path = config_path
        self.config_hash = config_hash
        self.seed = seed
        self.experiments = experiments
        self.verdicts = verdicts
        self.reports = reports
        self.wall_clock = wall_clock
        self.coherence = coherence if coherence is not None else []

    @property
    def passed(self):
        # type: (...) -> bool
        return all(v != 'fail' for v in self.verdicts.values()) and all(c['coherent'] for c in self.coherence)


def file_sha256(path  # type: str
                ):
    # type: (...) -> str
    with open(path, mode='rb') as f:
        return hashlib.sha256(f.read()).hexdigest()


def parse_overrides(tokens  # type: Sequence[str]
                    ):
    # type: (...) -> Dict[str, str]
    """
    Parses `--key=value` tokens.

    >>> dict(parse_overrides(['--seed=3', '--block_a.n_grid=100,1000']))
    {'seed': '3', 'block_a.n_grid': '100,1000'}

    :param tokens:
    :return:
    """
    overrides = OrderedDict()
    for token in tokens:
        if not token.startswith('--') or '=' not in token:
            raise ConfigError("unexpected argument '%s': overrides should be written --key=value" % token)
        key, value = token[2:].split('=', 1)
        if not key:
            raise ConfigError("empty override key in '%s'" % token)
        overrides[key] = value
    return overrides


# ---- subcommands

def cmd_run(config_path,            # type: str
            overrides=None,         # type: Dict[str, Any]
            jobs=None,              # type: int
            dump=False,             # type: bool
            logger=default_logger   # type: Any
            ):
    # type: (...) -> int
    """
    Runs all experiment blocks of a configuration file, writes one json report per block and a manifest in the
    output directory.

    :param config_path: a .cfg or .yaml run configuration
    :param overrides: `key=value` overrides, also used as template variables
    :param jobs: number of worker threads, overriding the configuration
    :param dump: if True the raw samples of every block are written as csv
    :param logger:
    :return: EXIT_PASS if all verdicts pass, EXIT_FAIL otherwise
    """
    start = perf_counter()
    run_config = load_run_config(config_path, overrides)
    if jobs is not None:
        run_config.global_config.jobs = jobs
    if dump:
        for exp in run_config.experiments.values():
            exp.dump = True

    results = run_all(run_config, logger=logger)
    coherence = []
    for check in coherence_checks(results, logger=logger):
        entry = OrderedDict(check)
        entry['coherent'] = check.coherent
        coherence.append(entry)

    glob = run_config.global_config
    manifest = RunManifest(version=_get_version(), config_path=config_path, config_hash=file_sha256(config_path),
                           seed=glob.seed, experiments=[exp.experiment for exp in run_config.experiments.values()],
                           verdicts=OrderedDict((block, report.verdict) for block, report, _ in results),
                           reports=OrderedDict((block, path) for block, _, path in results),
                           wall_clock=perf_counter() - start, coherence=coherence)
    write_json(dict(manifest), os.path.join(glob.output, MANIFEST_NAME), logger=logger)

    for block, report, _ in results:
        logger.info("%-30s %-20s %-28s %s" % (block, report.experiment, report.model, report.verdict))
    return EXIT_PASS if manifest.passed else EXIT_FAIL


def cmd_sample(model,       # type: str
               n,           # type: int
               seed=0,      # type: int
               out=None,    # type: str
               logger=default_logger  # type: Any
               ):
    # type: (...) -> pd.DataFrame
    """
    Draws `n` i.i.d. variates of a catalog model, as a dataframe with a single column `x`, written as csv to `out`
    (or stdout).
    """
    df = pd.DataFrame({'x': sample_iid(model, n, RandomSource(seed))})
    _emit_csv(df, out, logger)
    return df


def cmd_path(alpha,                     # type: float
             p=0.5,                     # type: float
             c=1.,                      # type: float
             gamma_prime=0.,            # type: float
             epsilon=DEFAULT_EPSILON,   # type: float
             grid_size=DEFAULT_GRID_SIZE,  # type: int
             seed=0,                    # type: int
             out=None,                  # type: str
             logger=default_logger      # type: Any
             ):
    """
    Simulates one path of the Levy process with X(1) ~ S(alpha, gamma_prime, c, p, 1 - p). The path (`time,value`) is
    written to `out` and its jumps (`time,size`) to the `<out>_jumps.csv` sidecar. Without `out`, only the path is
    printed.

    :return: the path and jumps dataframes
    """
    spec = limit_spec_for(alpha, p, c)
    path = simulate_path(spec, gamma_prime, epsilon=epsilon, grid_size=grid_size, rng=RandomSource(seed))
    path_df, jumps_df = path.to_frames()
    _emit_csv(path_df, out, logger)
    if out is not None:
        _emit_csv(jumps_df, jumps_sidecar(out), logger)
    return path_df, jumps_df


def jumps_sidecar(out  # type: str
                  ):
    # type: (...) -> str
    """
    >>> jumps_sidecar('paths/p.csv')
    'paths/p_jumps.csv'
    """
    root, ext = os.path.splitext(out)
    return "%s_jumps%s" % (root, ext or '.csv')


def cmd_an(model,                  # type: str
           n_grid=(10, 100, 1000, 10000, 100000),  # type: Sequence[int]
           out=None,               # type: str
           logger=default_logger   # type: Any
           ):
    # type: (...) -> pd.DataFrame
    """
    The table of norming constants (n, a_n, b_n, feller_gamma_n) of a catalog model, printed or written as csv.
    """
    df = pd.DataFrame.from_records([dict(r) for r in norming_table(model, n_grid)],
                                   columns=['n', 'a_n', 'b_n', 'feller_gamma_n'])
    if out is None:
        print(render_table(df))
    else:
        write_csv(df, out, logger=logger)
    return df


def report_rows(report  # type: Dict[str, Any]
                ):
    # type: (...) -> List[Dict[str, Any]]
    """The rows of the text rendering of a json report or manifest"""
    if 'verdicts' in report:
        return [OrderedDict([('block', block), ('verdict', verdict), ('report', report['reports'].get(block))])
                for block, verdict in report['verdicts'].items()]
    rows = []
    for name, r in (report.get('reports', None) or dict()).items():
        rows.append(OrderedDict([('check', name), ('kind', r['kind']),
                                 ('distances', ' '.join("%.4f" % d for d in r['distances'])),
                                 ('threshold', "%.4f" % r['threshold']), ('verdict', r['verdict'])]))
    return rows


def cmd_report(path  # type: str
               ):
    # type: (...) -> str
    """
    Renders a json report (or a run manifest) as a text table, followed by its diagnostic table and notes if any.
    """
    report = read_json(path)
    lines = []
    if 'verdicts' not in report:
        lines.append("%s on %s (alpha=%s): %s" % (report['experiment'], report['model'], report['alpha'],
                                                  report['verdict']))
    rows = report_rows(report)
    if rows:
        lines.append(render_table(rows))
    if report.get('coherence'):
        lines.append(render_table(report['coherence']))
    if report.get('table'):
        lines.append(render_table(report['table']))
    for note in report.get('notes', None) or ():
        lines.append("note: %s" % note)
    text = '\n'.join(lines)
    print(text)
    return text


def _emit_csv(df, out, logger):
    if out is None:
        sys.stdout.write(df.to_csv(index=False, lineterminator='\n', float_format='%.17g'))
    else:
        write_csv(df, out, logger=logger)


# ---- entry point

def build_argument_parser():
    # type: (...) -> argparse.ArgumentParser
    parser = argparse.ArgumentParser(prog='selfnormlab',
                                     description="Monte Carlo checks of the convergence of self-normalized sums.")
    parser.add_argument('-v', '--verbose', action='store_true', help="debug logging")
    parser.add_argument('-q', '--quiet', action='store_true', help="only log warnings and errors")
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    run = sub.add_parser('run', help="run the experiment blocks of a configuration file. Extra --key=value "
                                     "arguments override configuration fields ('block.key' for a single block)")
    run.add_argument('config', help="a .cfg or .yaml run configuration")
    run.add_argument('--jobs', type=int, default=None,
                     help="number of worker threads (default: the configuration value, else the number of cores)")
    run.add_argument('--dump', action='store_true', help="write the raw samples as csv next to the reports")

    sample = sub.add_parser('sample', help="draw i.i.d. variates of a catalog model")
    sample.add_argument('model', help="a model string such as 'rademacher' or 'pareto_sym:1.5'")
    sample.add_argument('n', type=int)
    sample.add_argument('--seed', type=int, default=0)
    sample.add_argument('--out', default=None, help="output csv file (default: stdout)")

    path = sub.add_parser('path', help="simulate one path of a stable levy process")
    path.add_argument('--alpha', type=float, required=True)
    path.add_argument('--p', type=float, default=0.5, help="right tail balance (default: 0.5)")
    path.add_argument('--c', type=float, default=1., help="scale weight (default: 1)")
    path.add_argument('--gamma', type=float, default=0., help="location of X(1) (default: 0)")
    path.add_argument('--epsilon', type=float, default=DEFAULT_EPSILON)
    path.add_argument('--grid-size', type=int, default=DEFAULT_GRID_SIZE)
    path.add_argument('--seed', type=int, default=0)
    path.add_argument('--out', default=None, help="output csv file. The jumps are written to <out>_jumps.csv")

    an = sub.add_parser('an', help="print the norming constants of a catalog model")
    an.add_argument('model')
    an.add_argument('--n', type=int, nargs='+', default=[10, 100, 1000, 10000, 100000])
    an.add_argument('--out', default=None, help="output csv file (default: print a table)")

    report = sub.add_parser('report', help="render a json report or run manifest as a text table")
    report.add_argument('file')
    return parser


def _dispatch(args, extra, logger):
    if args.command == 'run':
        return cmd_run(args.config, parse_overrides(extra), jobs=args.jobs, dump=args.dump, logger=logger)
    if extra:
        raise ConfigError("unrecognized arguments: %s" % ' '.join(extra))
    if args.command == 'sample':
        cmd_sample(args.model, args.n, seed=args.seed, out=args.out, logger=logger)
    elif args.command == 'path':
        cmd_path(args.alpha, p=args.p, c=args.c, gamma_prime=args.gamma, epsilon=args.epsilon,
                 grid_size=args.grid_size, seed=args.seed, out=args.out, logger=logger)
    elif args.command == 'an':
        cmd_an(args.model, args.n, out=args.out, logger=logger)
    else:
        cmd_report(args.file)
    return EXIT_PASS


def main(argv=None,             # type: Sequence[str]
         logger=default_logger  # type: Any
         ):
    # type: (...) -> int
    """
    Runs the command line `argv` (default: `sys.argv[1:]`) and returns the exit code.
    """
    args, extra = build_argument_parser().parse_known_args(argv)
    logger.setLevel(DEBUG if args.verbose else (WARNING if args.quiet else INFO))

    try:
        return _dispatch(args, extra, logger)
    except GeneratorFailure as e:
        cause = e.cause
        if isinstance(cause, NUMERICAL_ERRORS):
            logger.error("n=%s: %s" % (e.n, cause))
            return EXIT_NUMERICAL
        if isinstance(cause, CONFIG_ERRORS):
            logger.error("n=%s: %s" % (e.n, cause))
            return EXIT_CONFIG
        raise
    except HypothesisViolation as e:
        logger.error(str(e))
        return EXIT_HYPOTHESIS
    except NUMERICAL_ERRORS as e:
        logger.error(str(e))
        return EXIT_NUMERICAL
    except CONFIG_ERRORS as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except ValueError as e:
        # invalid command line values, such as a negative sample size
        logger.error(str(e))
        return EXIT_CONFIG
