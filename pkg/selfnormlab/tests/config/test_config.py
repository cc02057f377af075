import os

import pytest
from jinja2 import UndefinedError

from selfnormlab import RunConfig, GlobalConfig, ExperimentConfig, ConfigError, ConfigTemplateSyntaxError, \
    load_run_config, default_jobs, EXPERIMENTS

CONFIGS_DIR = os.path.join(os.path.dirname(__file__), os.pardir, os.pardir, 'configs')

CFG_CONTENTS = """
[global]
seed = 7
output = {{ out_dir }}
jobs = 2

[block_a]
experiment = exp_theorem_main
model = pareto_sym:1.5
alpha = 1.5
n_grid = 100, 1000
replicates = 2000
threshold_fdd = 0.05

[block_b]
experiment = exp_km_diagnostic
model = logpareto2
seed = 3
"""


def test_empty_cfg():
    """Tests that a minimum manually created configuration dumps and loads without issue"""

    cfg = RunConfig()
    s = cfg.dumps_yaml(default_flow_style=False)

    ref = """!yamlable/selfnormlab.RunConfig
experiments: {}
global:
  budget: 10000000000.0
  jobs: %s
  output: reports
  seed: 0
""" % default_jobs()
    assert s == ref

    cfg2 = RunConfig.loads_yaml(s)
    assert cfg == cfg2

    # templating
    ref2 = ref.replace('seed: 0', 'seed: {{ my_seed }}')
    cfg3 = RunConfig.loads_yaml(ref2, my_seed=0)
    assert cfg == cfg3

    # error template 1
    ref_err = ref.replace('seed: 0', 'seed: { my_seed }}')
    with pytest.raises(ConfigTemplateSyntaxError):
        RunConfig.loads_yaml(ref_err, my_seed=0)

    # error template 2: not all variables set
    with pytest.raises(UndefinedError):
        RunConfig.loads_yaml(ref2, my_sed=0)


def test_full_cfg():
    """Tests that a manually created configuration dumps and loads without issue"""

    global_cfg = GlobalConfig(seed=12, output='out')
    first = ExperimentConfig('exp_triple_raikov', 'pareto_sym:0.8', n_grid=[100, 1000], replicates=1000,
                             thresholds=dict(triple=0.05))
    second = ExperimentConfig('exp_degenerate', 'slowvar_tail', seed=4)
    cfg = RunConfig(global_cfg, first_block=first, second_block=second)

    s = cfg.dumps_yaml(default_flow_style=False)
    assert s.startswith("!yamlable/selfnormlab.RunConfig\n")
    assert "  first_block:\n" in s
    assert "      triple: 0.05\n" in s

    cfg2 = RunConfig.loads_yaml(s)
    assert cfg == cfg2
    assert list(cfg2.experiments) == ['first_block', 'second_block']
    assert cfg2.seed_for('first_block') == 12
    assert cfg2.seed_for('second_block') == 4


def test_cfg_format():
    """Tests the ConfigParser format: typed values, thresholds and template variables"""
    cfg = RunConfig.loads_config(CFG_CONTENTS, out_dir='here')
    assert cfg.global_config == GlobalConfig(seed=7, output='here', jobs=2)
    assert list(cfg.experiments) == ['block_a', 'block_b']

    a = cfg.experiments['block_a']
    assert a.experiment == 'exp_theorem_main'
    assert a.alpha == 1.5
    assert a.n_grid == [100, 1000]
    assert a.replicates == 2000
    assert a.thresholds == {'fdd': 0.05}
    assert a.draws == 2e6

    b = cfg.experiments['block_b']
    assert b.alpha is None and b.replicates is None
    assert b.effective_replicates == 20000
    assert cfg.seed_for('block_b') == 3

    cfg.assert_valid_for_experiments(EXPERIMENTS)
    with pytest.raises(ConfigError):
        cfg.assert_valid_for_experiments(['exp_degenerate'])


def test_default_section_warns():
    with pytest.warns(UserWarning):
        RunConfig.loads_config("[DEFAULT]\nseed = 2\n")


@pytest.mark.parametrize("block, field, bad_value", [
    ('block_a', 'foo', '1'),
    ('block_a', 'model', 'pareto_sym:3'),
    ('block_a', 'model', 'no_such_model'),
    ('block_a', 'alpha', '0.8'),
    ('block_a', 'n_grid', '1000, 100'),
    ('block_a', 'replicates', '1.5'),
    ('block_a', 'epsilon', '0'),
    ('block_a', 't_set', '0, 1'),
    ('block_a', 'threshold_fdd', 'abc'),
], ids=lambda v: str(v))
def test_invalid_block(block, field, bad_value):
    """Tests that invalid fields raise a ConfigError naming the block and the field"""
    contents = CFG_CONTENTS.replace("[%s]\n" % block, "[%s]\n%s = %s\n" % (block, field, bad_value), 1)
    # the new line comes first, later lines with the same key would be a parser error
    contents = "\n".join(line for line in contents.split("\n")
                         if not (line.startswith(field + " ") and line != "%s = %s" % (field, bad_value)))
    with pytest.raises(ConfigError) as exc_info:
        RunConfig.loads_config(contents, out_dir='here')
    err = exc_info.value
    assert err.block == block
    assert "block [%s]" % block in str(err)


def test_missing_mandatory_field():
    with pytest.raises(ConfigError) as exc_info:
        RunConfig.loads_config("[block]\nmodel = rademacher\n")
    assert exc_info.value.field == 'experiment'


def test_invalid_global():
    with pytest.raises(ConfigError) as exc_info:
        RunConfig.loads_config("[global]\njobs = 0\n")
    assert exc_info.value.block == 'global'
    with pytest.raises(ConfigError):
        RunConfig.loads_config("[global]\ncolor = blue\n")


def test_default_jobs():
    """When neither the file nor the command line sets it, jobs is the number of cores"""
    assert default_jobs() == (os.cpu_count() or 1)
    assert GlobalConfig().jobs == default_jobs()
    assert RunConfig.loads_config("[global]\nseed = 1\n").global_config.jobs == default_jobs()
    assert GlobalConfig(jobs='2').jobs == 2


def test_overrides():
    """Tests unqualified and block-qualified overrides"""
    cfg = RunConfig.loads_config(CFG_CONTENTS, out_dir='here')
    cfg2 = cfg.with_overrides({'block_a.n_grid': '100,1000,10000', 'replicates': '1000', 'output': 'elsewhere',
                               'threshold_fdd': '0.1', 'global.jobs': '3'})
    assert cfg2.experiments['block_a'].n_grid == [100, 1000, 10000]
    assert cfg2.experiments['block_a'].replicates == 1000
    assert cfg2.experiments['block_b'].replicates == 1000
    assert cfg2.experiments['block_b'].thresholds == {'fdd': 0.1}
    assert cfg2.global_config.jobs == 3

    # an unqualified output only changes the output directory
    assert cfg2.global_config.output == 'elsewhere'
    assert cfg2.experiments['block_a'].output is None
    assert cfg.with_overrides({'block_a.output': 'a.json'}).experiments['block_a'].output == 'a.json'

    # the original is unchanged
    assert cfg.experiments['block_a'].n_grid == [100, 1000]

    with pytest.raises(ConfigError):
        cfg.with_overrides({'no_such_field': '1'})
    with pytest.raises(ConfigError) as exc_info:
        cfg.with_overrides({'no_such_block.seed': '1'})
    assert exc_info.value.block == 'no_such_block'
    with pytest.raises(ConfigError):
        cfg.with_overrides({'block_a.replicates': '-1'})


def test_budget():
    cfg = RunConfig.loads_config(CFG_CONTENTS, out_dir='here')
    cfg.check_budget()
    with pytest.raises(ConfigError) as exc_info:
        cfg.with_overrides({'global.budget': '1e5'}).check_budget()
    assert exc_info.value.block == 'block_a'
    assert exc_info.value.field == 'replicates'


@pytest.mark.parametrize("ext", ['.cfg', '.yaml'])
def test_load_run_config(tmpdir, ext):
    """Tests that both file formats load with template variables and overrides"""
    cfg = RunConfig.loads_config(CFG_CONTENTS, out_dir='here')
    path = str(tmpdir.join('run' + ext))
    if ext == '.cfg':
        with open(path, 'wt') as f:
            f.write(CFG_CONTENTS)
    else:
        with open(path, 'wt') as f:
            f.write(cfg.dumps_yaml(default_flow_style=False).replace('output: here', 'output: {{ out_dir }}'))

    loaded = load_run_config(path, {'out_dir': 'there', 'block_a.replicates': '3000'})
    assert loaded.global_config.output == 'there'
    assert loaded.experiments['block_a'].replicates == 3000
    assert loaded.experiments['block_b'] == cfg.experiments['block_b']


def test_load_run_config_errors(tmpdir):
    """Tests that every loading failure is a ConfigError naming the file"""
    with pytest.raises(ConfigError) as exc_info:
        load_run_config(str(tmpdir.join('missing.cfg')))
    assert 'missing.cfg' in str(exc_info.value)

    txt = tmpdir.join('run.txt')
    txt.write(CFG_CONTENTS)
    with pytest.raises(ConfigError):
        load_run_config(str(txt))

    broken = tmpdir.join('broken.cfg')
    broken.write("[global\nseed = 1\n")
    with pytest.raises(ConfigError):
        load_run_config(str(broken))

    unbalanced = tmpdir.join('unbalanced.cfg')
    unbalanced.write("[global]\nseed = { seed }}\n")
    with pytest.raises(ConfigError):
        load_run_config(str(unbalanced))

    undeclared = tmpdir.join('run.cfg')
    undeclared.write(CFG_CONTENTS)
    with pytest.raises(ConfigError) as exc_info:
        load_run_config(str(undeclared), {'out_dir': 'a', 'outdir': 'b'})
    assert "outdir" in str(exc_info.value)

    not_a_run = tmpdir.join('list.yaml')
    not_a_run.write("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_run_config(str(not_a_run))


@pytest.mark.parametrize("name", ['theorem1_rademacher.cfg', 'heavy_tails.yaml', 'negative_controls.cfg'])
def test_shipped_configs(name):
    """Tests that the shipped configurations load and only refer to registered experiments"""
    cfg = load_run_config(os.path.join(CONFIGS_DIR, name))
    assert len(cfg.experiments) > 0
    cfg.assert_valid_for_experiments(EXPERIMENTS)
    cfg.check_budget()
