# Authors: selfnormlab contributors
#
# License: 3-clause BSD
"""
Run configurations: a `global` block and named experiment blocks, read from `.cfg` (ConfigParser) or `.yaml`
(yamlable) files. Both formats are jinja2 templates.
"""
import os
from collections import OrderedDict
from warnings import warn

from jinja2 import Environment, StrictUndefined, TemplateError, meta
from yaml import YAMLError

from configparser import ConfigParser, Error as ConfigParserError

try:  # python 3.5+
    from typing import Any, Dict, Iterable, Sequence, Set, Union
    from io import IOBase, StringIO
except ImportError:
    pass

from autoclass import autodict
from valid8 import ValidationError
from yamlable import YamlAble, yaml_info

from .doa_models import UnknownModel, get_model


YAML_NS = 'selfnormlab'
"""The namespace used for yaml conversion"""

DEFAULT_BUDGET = 1e10
"""Default maximum number of scalar draws per experiment block (replicates * max(n_grid))"""

DEFAULT_N_GRID = (100, 1000, 10000)
DEFAULT_REPLICATES = 20000
DEFAULT_T_SET = (0.25, 0.5, 0.75, 1.)

THRESHOLD_PREFIX = 'threshold_'
"""In .cfg files, thresholds are written `threshold_<name> = <value>`"""


def default_jobs():
    # type: (...) -> int
    """
    The number of worker threads used when neither the configuration nor `--jobs` sets it: the number of cores.
    """
    return os.cpu_count() or 1


GLOBAL_FIELDS = ('seed', 'output', 'jobs', 'budget')
GLOBAL_ONLY_KEYS = ('output', )


class ConfigError(Exception):
    """
    Raised when a configuration file is invalid. Names the file, the block and the field when they are known.
    """
    def __init__(self,
                 reason,       # type: str
                 path=None,    # type: str
                 block=None,   # type: str
                 field=None    # type: str
                 ):
        self.reason = reason
        self.path = path
        self.block = block
        self.field = field
        super(ConfigError, self).__init__()

    def __str__(self):
        where = []
        if self.path is not None:
            where.append("file %s" % self.path)
        if self.block is not None:
            where.append("block [%s]" % self.block)
        if self.field is not None:
            where.append("field '%s'" % self.field)
        prefix = "Invalid configuration (%s): " % ', '.join(where) if where else "Invalid configuration: "
        return prefix + self.reason


# ---- value parsing. `.cfg` files give strings, `.yaml` files typed values

def _parse_bool(value):
    # type: (...) -> bool
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in ('1', 'yes', 'true', 'on'):
        return True
    elif s in ('0', 'no', 'false', 'off'):
        return False
    raise ValueError("not a boolean: %r" % value)


def _parse_float(value):
    # type: (...) -> float
    return float(value)


def _parse_int(value):
    # type: (...) -> int
    if isinstance(value, str):
        f = float(value.strip())
        if not f.is_integer():
            raise ValueError("not an integer: %r" % value)
        return int(f)
    return int(value)


def _parse_list(item_parser):
    def _parse(value):
        if isinstance(value, str):
            items = [v for v in value.replace(',', ' ').split() if v]
        else:
            items = list(value)
        if len(items) == 0:
            raise ValueError("empty list")
        return [item_parser(v) for v in items]
    return _parse


def _parse_optional(parser):
    def _parse(value):
        if value is None or (isinstance(value, str) and value.strip().lower() in ('', 'none', 'null')):
            return None
        return parser(value)
    return _parse


@autodict
class GlobalConfig:
    """
    Settings shared by all experiment blocks of a run.
    """
    def __init__(self,
                 seed=0,                 # type: int
                 output='reports',       # type: str
                 jobs=None,              # type: int
                 budget=DEFAULT_BUDGET   # type: float
                 ):
        """

        :param seed: the top-level seed. Experiment blocks without a seed use it
        :param output: the directory where reports are written
        :param jobs: number of worker threads used for replicate loops. Defaults to `default_jobs()`
        :param budget: maximum number of scalar draws per experiment block
        """
        self.seed = _parse_int(seed)
        self.output = output
        self.jobs = default_jobs() if jobs is None else _parse_int(jobs)
        self.budget = _parse_float(budget)
        if self.seed < 0:
            raise ValueError("seed should be non-negative")
        if self.jobs < 1:
            raise ValueError("jobs should be >= 1")


_EXPERIMENT_PARSERS = OrderedDict([
    ('experiment', str),
    ('model', str),
    ('alpha', _parse_optional(_parse_float)),
    ('n_grid', _parse_list(_parse_int)),
    ('replicates', _parse_optional(_parse_int)),
    ('epsilon', _parse_float),
    ('seed', _parse_optional(_parse_int)),
    ('output', _parse_optional(str)),
    ('t_set', _parse_list(_parse_float)),
    ('grid_size', _parse_int),
    ('an_scale', _parse_float),
    ('dump', _parse_bool),
])


@autodict
class ExperimentConfig:
    """
    The configuration of one experiment block: which experiment to run, on which model, with which budgets.
    """
    def __init__(self,
                 experiment,                # type: str
                 model,                     # type: str
                 alpha=None,                # type: float
                 n_grid=DEFAULT_N_GRID,     # type: Sequence[int]
                 replicates=None,           # type: int
                 epsilon=0.01,              # type: float
                 seed=None,                 # type: int
                 thresholds=None,           # type: Dict[str, float]
                 output=None,               # type: str
                 t_set=DEFAULT_T_SET,       # type: Sequence[float]
                 grid_size=1024,            # type: int
                 an_scale=1.,               # type: float
                 dump=False                 # type: bool
                 ):
        """

        :param experiment: the name of a registered experiment, for example 'exp_theorem_main'
        :param model: a model string, for example 'pareto_sym:1.5'
        :param alpha: an optional stability index, checked against the model
        :param n_grid: the increasing sample sizes
        :param replicates: the number of replicates per sample size. None uses the experiment default
        :param epsilon: the truncation level of the levy simulator
        :param seed: an optional seed. Defaults to the global seed
        :param thresholds: named thresholds overriding the experiment defaults
        :param output: an optional report file name. Defaults to '<block>.json'
        :param t_set: the times of the finite-dimensional checks
        :param grid_size: the time grid size of simulated paths
        :param an_scale: a multiplier applied to a_n (1 except for negative controls)
        :param dump: if True the raw samples are written as csv next to the report
        """
        values = OrderedDict([('experiment', experiment), ('model', model), ('alpha', alpha), ('n_grid', n_grid),
                              ('replicates', replicates), ('epsilon', epsilon), ('seed', seed), ('output', output),
                              ('t_set', t_set), ('grid_size', grid_size), ('an_scale', an_scale), ('dump', dump)])
        for name, parser in _EXPERIMENT_PARSERS.items():
            try:
                setattr(self, name, parser(values[name]))
            except (TypeError, ValueError) as e:
                raise ConfigError("invalid value %r: %s" % (values[name], e), field=name)

        self.thresholds = OrderedDict()
        for name, value in (thresholds or dict()).items():
            try:
                self.thresholds[name] = _parse_float(value)
            except (TypeError, ValueError) as e:
                raise ConfigError("invalid value %r: %s" % (value, e), field=THRESHOLD_PREFIX + name)

        self._check()

    def _check(self):
        if any(a >= b for a, b in zip(self.n_grid[:-1], self.n_grid[1:])) or self.n_grid[0] < 1:
            raise ConfigError("n_grid should be increasing positive integers: %r" % (self.n_grid, ), field='n_grid')
        if self.replicates is not None and self.replicates < 1:
            raise ConfigError("replicates should be positive", field='replicates')
        if not 0 < self.epsilon <= 1:
            raise ConfigError("epsilon should be in (0, 1]", field='epsilon')
        if not all(0 < t <= 1 for t in self.t_set):
            raise ConfigError("t_set should be a subset of (0, 1]", field='t_set')
        if self.an_scale <= 0:
            raise ConfigError("an_scale should be positive", field='an_scale')
        if self.alpha is not None and not 0 < self.alpha <= 2:
            raise ConfigError("alpha should be in (0, 2]", field='alpha')
        try:
            model = get_model(self.model)
        except (UnknownModel, ValidationError, ValueError, TypeError) as e:
            raise ConfigError(str(e), field='model')
        if self.alpha is not None and model.alpha_attractor != self.alpha:
            raise ConfigError("alpha=%r does not match the index of model %s (%r)"
                              % (self.alpha, model.name, model.alpha_attractor), field='alpha')

    @property
    def effective_replicates(self):
        # type: (...) -> int
        return self.replicates if self.replicates is not None else DEFAULT_REPLICATES

    @property
    def draws(self):
        # type: (...) -> float
        """The number of scalar draws of this block"""
        return float(self.effective_replicates) * max(self.n_grid)

    @classmethod
    def from_section(cls,
                     section  # type: Dict[str, Any]
                     ):
        # type: (...) -> ExperimentConfig
        """
        Creates an `ExperimentConfig` from a flat mapping, where thresholds are `threshold_<name>` keys. Unknown
        fields raise a `ConfigError`.

        :param section:
        :return:
        """
        kwargs = dict()
        thresholds = OrderedDict(section.get('thresholds', None) or ())
        for key, value in section.items():
            if key == 'thresholds':
                continue
            elif key.startswith(THRESHOLD_PREFIX):
                thresholds[key[len(THRESHOLD_PREFIX):]] = value
            elif key in _EXPERIMENT_PARSERS:
                kwargs[key] = value
            else:
                raise ConfigError("unknown field", field=key)
        for mandatory in ('experiment', 'model'):
            if mandatory not in kwargs:
                raise ConfigError("missing mandatory field", field=mandatory)
        return cls(thresholds=thresholds, **kwargs)


def _global_from_section(section):
    # type: (...) -> GlobalConfig
    try:
        return GlobalConfig(**section)
    except TypeError as e:
        raise ConfigError(str(e), block='global')
    except ValueError as e:
        raise ConfigError(str(e), block='global')


def _with_block(err, block, path=None):
    # type: (...) -> ConfigError
    err.block = block
    if path is not None:
        err.path = path
    return err


@yaml_info(yaml_tag_ns=YAML_NS)
@autodict
class RunConfig(YamlAble):
    """
    A run configuration. It is made of two parts:

     * A 'global' configuration (a `GlobalConfig`)
     * experiment blocks (one `ExperimentConfig` for each), registered under a block name.
    """
    def __init__(self,
                 global_config=None,    # type: GlobalConfig
                 **experiments          # type: ExperimentConfig
                 ):
        """

        :param global_config: the global configuration, a GlobalConfig
        :param experiments: a dictionary of {block_name: ExperimentConfig}
        """
        if global_config is None:
            global_config = GlobalConfig()
        self.global_config = global_config
        self.experiments = OrderedDict(experiments)

    def seed_for(self,
                 block  # type: str
                 ):
        # type: (...) -> int
        """The seed of an experiment block: its own or the global one"""
        seed = self.experiments[block].seed
        return seed if seed is not None else self.global_config.seed

    def check_budget(self):
        """
        Raises a `ConfigError` if a block needs more scalar draws than the global budget.
        """
        for block, exp in self.experiments.items():
            if exp.draws > self.global_config.budget:
                raise ConfigError("replicates * max(n_grid) = %.3g is above the budget of %.3g scalar draws"
                                  % (exp.draws, self.global_config.budget), block=block, field='replicates')

    def assert_valid_for_experiments(self,
                                     experiment_names  # type: Iterable[str]
                                     ):
        """
        Asserts that every block refers to one of the experiments provided.

        :param experiment_names:
        :return:
        """
        experiment_names = list(experiment_names)
        for block, exp in self.experiments.items():
            if exp.experiment not in experiment_names:
                raise ConfigError("unknown experiment '%s'. Available experiments: %s"
                                  % (exp.experiment, experiment_names), block=block, field='experiment')

    def with_overrides(self,
                       overrides  # type: Dict[str, Any]
                       ):
        # type: (...) -> RunConfig
        """
        Returns a new configuration where `key=value` overrides have been applied: `key` applies to the global block
        and to every experiment block, `block.key` applies to one block ('global.key' for the global one).

        :param overrides:
        :return:
        """
        dct = self.__to_yaml_dict__()
        global_dct = dct['global']
        exp_dcts = dct['experiments']
        for key, value in overrides.items():
            if '.' in key:
                block, field = key.split('.', 1)
                if block == 'global':
                    global_dct[field] = value
                elif block in exp_dcts:
                    _set_field(exp_dcts[block], field, value)
                else:
                    raise ConfigError("override '%s' refers to an unknown block" % key, block=block)
            else:
                found = key in global_dct or key.startswith(THRESHOLD_PREFIX)
                if key in global_dct:
                    global_dct[key] = value
                # unqualified, 'output' is the global directory. Block report names need 'block.output'
                for exp_dct in (exp_dcts.values() if key not in GLOBAL_ONLY_KEYS else ()):
                    if key in exp_dct or key.startswith(THRESHOLD_PREFIX):
                        found = True
                        _set_field(exp_dct, key, value)
                if not found:
                    raise ConfigError("override '%s' does not match any field" % key, field=key)
        return RunConfig.__from_yaml_dict__(dct, None)

    # ---- yamlable interface ----

    def __to_yaml_dict__(self):
        # type: (...) -> Dict[str, Any]
        """ This optional method is called when you call yaml.dump(). See `yamlable` for details."""
        def _exp_dict(exp):
            d = dict(exp)
            d['n_grid'] = list(d['n_grid'])
            d['t_set'] = list(d['t_set'])
            d['thresholds'] = dict(d['thresholds'])
            return d

        return {'global': dict(self.global_config),
                'experiments': {block: _exp_dict(exp) for block, exp in self.experiments.items()}}

    @classmethod
    def __from_yaml_dict__(cls, dct, yaml_tag):
        # type: (...) -> RunConfig
        """ This optional method is called when you call yaml.load(). See `yamlable` for details."""
        global_cfg = _global_from_section(dct.get('global', None) or dict())
        experiments = OrderedDict()
        for block, exp_dct in (dct.get('experiments', None) or dict()).items():
            try:
                experiments[block] = ExperimentConfig.from_section(exp_dct)
            except ConfigError as e:
                raise _with_block(e, block)
        return RunConfig(global_cfg, **experiments)

    @classmethod
    def load_yaml(cls,                  # type: Type[Y]
                  file_path_or_stream,  # type: Union[str, IOBase, StringIO]
                  safe=True,            # type: bool
                  **var_values          # type: Any
                  ):  # type: (...) -> Y
        """ applies the template before loading """
        contents = read_file_and_apply_template(file_path_or_stream, **var_values)
        return YamlAble.loads_yaml(contents, safe=safe)

    @classmethod
    def loads_yaml(cls,          # type: Type[Y]
                   yaml_str,     # type: str
                   safe=True,    # type: bool
                   **var_values  # type: Any
                   ):  # type: (...) -> Y
        """ applies the template before loading """
        contents = apply_template(yaml_str, **var_values)
        return YamlAble.loads_yaml(contents, safe=safe)

    # ---- configparser interface ----

    @staticmethod
    def loads_config(contents,     # type: str
                     source=None,  # type: str
                     **var_values  # type: Any
                     ):
        # type: (...) -> RunConfig
        """
        Creates a `RunConfig` from the contents of a configuration file in `ConfigParser` format, with a 'global'
        section and one section per experiment block.

        :param contents:
        :param source: the file name, for error messages
        :param var_values: variables to replace in the configuration. For example `seed=12` will inject `12`
            everywhere where `{{seed}}` is found.
        :return:
        """
        contents = apply_template(contents, original_path=source, **var_values)

        config = ConfigParser(interpolation=None)
        config.read_string(contents, source=source or '<string>')

        global_cfg = GlobalConfig()
        experiments = OrderedDict()
        for section_name, section_contents in config.items():
            if section_name == 'global':
                global_cfg = _global_from_section(dict(section_contents))
            elif section_name == 'DEFAULT':
                if len(section_contents) > 0:
                    warn('Configuration contains a DEFAULT section, that will be ignored')
            else:
                try:
                    experiments[section_name] = ExperimentConfig.from_section(OrderedDict(section_contents))
                except ConfigError as e:
                    raise _with_block(e, section_name)

        return RunConfig(global_cfg, **experiments)

    @staticmethod
    def load_config(cfg_file_path,  # type: str
                    **var_values    # type: Any
                    ):
        # type: (...) -> RunConfig
        """
        Creates a `RunConfig` from a configuration file (.ini or .cfg, see `ConfigParser`). See `loads_config`.

        :param cfg_file_path: the path to the config file in `ConfigParser` supported format
        :param var_values: variables to replace in the configuration file
        :return:
        """
        with open(cfg_file_path, mode='rt') as f:
            contents = f.read()
        return RunConfig.loads_config(contents, source=cfg_file_path, **var_values)


def _set_field(exp_dct, key, value):
    if key.startswith(THRESHOLD_PREFIX):
        exp_dct.setdefault('thresholds', dict())[key[len(THRESHOLD_PREFIX):]] = value
    else:
        exp_dct[key] = value


def is_field_name(key  # type: str
                  ):
    # type: (...) -> bool
    """
    True if `key` is a field of the global block or of experiment blocks.

    >>> is_field_name('seed'), is_field_name('threshold_fdd'), is_field_name('out_dir')
    (True, True, False)
    """
    return key in GLOBAL_FIELDS or key in _EXPERIMENT_PARSERS or key.startswith(THRESHOLD_PREFIX)


def template_variables(path  # type: str
                       ):
    # type: (...) -> Set[str]
    """The names of the undeclared jinja2 variables used in the file at `path`"""
    with open(path, mode='rt') as f:
        contents = f.read()
    return meta.find_undeclared_variables(env.parse(contents))


def load_run_config(path,            # type: str
                    overrides=None,  # type: Dict[str, Any]
                    ):
    # type: (...) -> RunConfig
    """
    Loads a `.cfg`/`.ini` or `.yaml`/`.yml` run configuration, with `overrides` used both as template variables and as
    field overrides (see `RunConfig.with_overrides`), then checks the budget. Unqualified keys that are not fields must
    be template variables of the file. All failures are raised as `ConfigError`.

    :param path:
    :param overrides:
    :return:
    """
    overrides = overrides or dict()
    template_vars = {k: v for k, v in overrides.items() if '.' not in k}
    field_overrides = OrderedDict((k, v) for k, v in overrides.items() if '.' in k or is_field_name(k))
    ext = os.path.splitext(path)[1].lower()
    try:
        if ext in ('.yaml', '.yml'):
            cfg = RunConfig.load_yaml(path, **template_vars)
            if not isinstance(cfg, RunConfig):
                raise ConfigError("the document is not a !yamlable/%s.RunConfig" % YAML_NS)
        elif ext in ('.cfg', '.ini'):
            cfg = RunConfig.load_config(path, **template_vars)
        else:
            raise ConfigError("unsupported file extension '%s': use .cfg, .ini, .yaml or .yml" % ext)

        unused = [k for k in template_vars if k not in field_overrides]
        if unused:
            declared = template_variables(path)
            unused = [k for k in unused if k not in declared]
            if unused:
                raise ConfigError("overrides %s match neither a field nor a template variable" % unused)

        if field_overrides:
            cfg = cfg.with_overrides(field_overrides)
        cfg.check_budget()
    except ConfigError as e:
        e.path = path
        raise
    except (OSError, ConfigParserError, YAMLError, TemplateError, ConfigTemplateSyntaxError) as e:
        raise ConfigError("%s: %s" % (type(e).__name__, e), path=path)

    return cfg


def read_file_and_apply_template(file_path_or_stream,  # type: Union[str, IOBase, StringIO]
                                 **var_values
                                 ):
    # type: (...) -> str
    """
    Reads a file or a stream and applies the jinja2 template with `var_values`

    :param file_path_or_stream:
    :param var_values:
    :return:
    """
    if isinstance(file_path_or_stream, str):
        with open(file_path_or_stream, mode='rt') as f:
            contents = f.read()
        original_path = file_path_or_stream
    else:
        with file_path_or_stream as f:
            contents = f.read()
        original_path = None

    return apply_template(contents, original_path=original_path, **var_values)


# the jinja2 environment that will be used
env = Environment(undefined=StrictUndefined)


class ConfigTemplateSyntaxError(Exception):
    """Raised when a double curly brace remains after template processing"""
    def __init__(self, contents, idx, original_path):
        self.extract = contents[max(0, idx - 30):idx + 32]
        self.original_path = original_path

    def __str__(self):
        if self.original_path is not None:
            tmpstr = "File: %s. " % self.original_path
        else:
            tmpstr = ""
        return "Syntax error in template: a double curly brace remains after template processing. %s" \
               "Extract: %s" % (tmpstr, self.extract)


def apply_template(contents,            # type: str
                   original_path=None,  # type: str
                   **var_values
                   ):
    # type: (...) -> str
    """
    Renders `contents` as a jinja2 template. Undefined variables raise a `jinja2.UndefinedError`.

    :param contents:
    :param original_path:
    :param var_values:
    :return:
    """
    template = env.from_string(contents)
    contents = template.render(**var_values)

    # jinja2 does not detect unbalanced braces
    if '{{' in contents or '}}' in contents:
        try:
            idx = contents.index("{{")
        except ValueError:
            idx = contents.index("}}")
        raise ConfigTemplateSyntaxError(contents, idx, original_path)

    return contents
