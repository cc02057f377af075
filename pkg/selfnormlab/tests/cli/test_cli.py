import os

import numpy as np
import pandas as pd
import pytest

from selfnormlab import ConfigError
from selfnormlab.cli import main, parse_overrides, cmd_report, file_sha256, jumps_sidecar, EXIT_PASS, EXIT_FAIL, \
    EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERICAL, MANIFEST_NAME
from selfnormlab.io_utils import read_json


KM_CFG = """
[global]
seed = 1
output = {{ out_dir }}

[km]
experiment = exp_km_diagnostic
model = logpareto2
"""

NEGATIVE_CONTROL_CFG = """
[global]
output = {{ out_dir }}

[triple]
experiment = exp_triple_raikov
model = rademacher
n_grid = 1000
replicates = 1000
an_scale = 2
"""

BLOCK_CFG = """
[global]
output = {{ out_dir }}

[block]
experiment = %s
model = %s
n_grid = %s
replicates = 1000
"""


def _write_cfg(tmpdir, contents, name='run.cfg'):
    path = tmpdir.join(name)
    path.write(contents)
    return str(path)


def test_run_pass(tmpdir):
    """ Tests that a passing run exits with 0 and writes the reports and the manifest """
    cfg_path = _write_cfg(tmpdir, KM_CFG)
    out = str(tmpdir.join('out'))
    assert main(['run', cfg_path, '--out_dir=%s' % out]) == EXIT_PASS

    manifest = read_json(os.path.join(out, MANIFEST_NAME))
    assert manifest['verdicts'] == {'km': 'pass'}
    assert manifest['experiments'] == ['exp_km_diagnostic']
    assert manifest['config_hash'] == file_sha256(cfg_path)
    assert manifest['seed'] == 1
    assert manifest['reports']['km'] == os.path.join(out, 'km.json')
    assert os.path.exists(os.path.join(out, 'km.json'))

    # rendering
    text = cmd_report(os.path.join(out, 'km.json'))
    assert text.startswith("exp_km_diagnostic on logpareto2 (alpha=2.0): pass")
    assert 'ratio' in text
    manifest_text = cmd_report(os.path.join(out, MANIFEST_NAME))
    assert 'km' in manifest_text and 'pass' in manifest_text
    assert main(['report', os.path.join(out, MANIFEST_NAME)]) == EXIT_PASS


def test_run_fail(tmpdir):
    """ Tests that a failing verdict exits with 1, and that --dump writes the raw samples """
    cfg_path = _write_cfg(tmpdir, NEGATIVE_CONTROL_CFG)
    out = str(tmpdir.join('out'))
    assert main(['run', cfg_path, '--dump', '--jobs', '2', '--out_dir=%s' % out]) == EXIT_FAIL

    report = read_json(os.path.join(out, 'triple.json'))
    assert report['verdict'] == 'fail'
    assert report['reports']['v2_over_a2']['verdict'] == 'fail'
    dump = pd.read_csv(os.path.join(out, 'triple_s_over_a.csv'))
    assert list(dump.columns) == ['n', 'value']
    assert len(dump) == 1000

    text = cmd_report(os.path.join(out, 'triple.json'))
    assert 'v2_over_a2' in text and 'fail' in text


def test_run_override_fixes_negative_control(tmpdir):
    """ Tests that a 'block.key' override is applied: with an_scale=1 the same configuration passes """
    cfg_path = _write_cfg(tmpdir, NEGATIVE_CONTROL_CFG.replace('n_grid = 1000', 'n_grid = 10000'))
    out = str(tmpdir.join('out'))
    assert main(['run', cfg_path, '--triple.an_scale=1', '--replicates=2000', '--out_dir=%s' % out]) == EXIT_PASS
    report = read_json(os.path.join(out, 'triple.json'))
    assert report['constants']['an_scale'] == 1.


@pytest.mark.parametrize("experiment, model, n_grid, expected", [
    ('exp_theorem_main', 'slowvar_tail', '100', EXIT_HYPOTHESIS),
    ('exp_degenerate', 'pareto_sym:1.5', '100', EXIT_HYPOTHESIS),
    ('exp_lemma_scalar', 'uniform_centered', '1', EXIT_NUMERICAL),
    ('exp_theorem_main', 'pareto_sym:3', '100', EXIT_CONFIG),
    ('exp_nope', 'rademacher', '100', EXIT_CONFIG),
], ids=lambda v: str(v))
def test_run_exit_codes(tmpdir, experiment, model, n_grid, expected):
    cfg_path = _write_cfg(tmpdir, BLOCK_CFG % (experiment, model, n_grid))
    assert main(['run', cfg_path, '--out_dir=%s' % tmpdir.join('out')]) == expected


def test_run_config_errors(tmpdir):
    """ Tests that a missing file, an unknown override and a malformed override all exit with 2 """
    cfg_path = _write_cfg(tmpdir, KM_CFG)
    assert main(['run', str(tmpdir.join('missing.cfg'))]) == EXIT_CONFIG
    assert main(['run', cfg_path, '--outdir=somewhere']) == EXIT_CONFIG
    assert main(['run', cfg_path, 'out_dir=somewhere']) == EXIT_CONFIG
    assert main(['run', cfg_path, '--out_dir=%s' % tmpdir.join('out'), '--budget=10']) == EXIT_CONFIG


def test_sample(tmpdir, capsys):
    """ Tests the sample command, on stdout and to a file """
    assert main(['-q', 'sample', 'rademacher', '5', '--seed', '3']) == EXIT_PASS
    lines = capsys.readouterr().out.strip().split('\n')
    assert lines[0] == 'x'
    assert len(lines) == 6
    assert set(float(v) for v in lines[1:]) <= {-1., 1.}

    out = str(tmpdir.join('s.csv'))
    assert main(['-q', 'sample', 'pareto_sym:1.5', '100', '--seed', '3', '--out', out]) == EXIT_PASS
    df = pd.read_csv(out)
    assert list(df.columns) == ['x']
    assert len(df) == 100

    # same seed, same draws
    out2 = str(tmpdir.join('s2.csv'))
    main(['-q', 'sample', 'pareto_sym:1.5', '100', '--seed', '3', '--out', out2])
    np.testing.assert_array_equal(pd.read_csv(out2)['x'], df['x'])


@pytest.mark.parametrize("argv", [['sample', 'nope', '10'], ['sample', 'rademacher', '0'],
                                  ['sample', 'rademacher', '10', '--unknown=1'],
                                  ['path', '--alpha', '1.5', '--epsilon', '1e-6']])
def test_invalid_commands(argv):
    assert main(['-q'] + argv) == EXIT_CONFIG


def test_path(tmpdir):
    """ Tests that the path command writes the path and the jumps sidecar """
    out = str(tmpdir.join('p.csv'))
    assert main(['-q', 'path', '--alpha', '1.5', '--p', '1', '--epsilon', '0.05', '--grid-size', '200',
                 '--seed', '2', '--out', out]) == EXIT_PASS
    path_df = pd.read_csv(out)
    assert list(path_df.columns) == ['time', 'value']
    assert len(path_df) == 200
    assert path_df['time'].iloc[0] == 0. and path_df['time'].iloc[-1] == 1.

    jumps_df = pd.read_csv(jumps_sidecar(out))
    assert list(jumps_df.columns) == ['time', 'size']
    assert (jumps_df['size'] >= 0.05).all()


def test_an(tmpdir):
    out = str(tmpdir.join('an.csv'))
    assert main(['-q', 'an', 'rademacher', '--n', '100', '10000', '--out', out]) == EXIT_PASS
    df = pd.read_csv(out)
    assert list(df.columns) == ['n', 'a_n', 'b_n', 'feller_gamma_n']
    np.testing.assert_allclose(df['a_n'], [10., 100.], rtol=1e-8)
    assert df['feller_gamma_n'].isnull().all()


def test_parse_overrides():
    assert dict(parse_overrides(['--seed=3', '--a.b=x=y'])) == {'seed': '3', 'a.b': 'x=y'}
    with pytest.raises(ConfigError):
        parse_overrides(['seed=3'])
    with pytest.raises(ConfigError):
        parse_overrides(['--seed'])
    with pytest.raises(ConfigError):
        parse_overrides(['--=3'])


COHERENCE_CFG = """
[global]
output = {{ out_dir }}

[main]
experiment = exp_theorem_main
model = uniform_centered
n_grid = 1000
replicates = 2000
t_set = 0.5, 1

[triple]
experiment = exp_triple_raikov
model = uniform_centered
n_grid = 100, 1000
replicates = 2000
"""


def test_run_coherence(tmpdir):
    """ Tests that the manifest compares S_n / V_n between the main experiment and the triple on the same model """
    cfg_path = _write_cfg(tmpdir, COHERENCE_CFG)
    out = str(tmpdir.join('out'))
    main(['run', cfg_path, '--out_dir=%s' % out])
    manifest = read_json(os.path.join(out, MANIFEST_NAME))
    assert len(manifest['coherence']) == 1
    check = manifest['coherence'][0]
    assert (check['main_block'], check['triple_block'], check['model'], check['n']) \
        == ('main', 'triple', 'uniform_centered', 1000)
    assert isinstance(check['coherent'], bool)
    assert 'main_block' in cmd_report(os.path.join(out, MANIFEST_NAME))


def test_run_same_seed_same_reports(tmpdir):
    """ Tests that two runs of the same configuration write identical reports, whatever the number of workers """
    cfg_path = _write_cfg(tmpdir, COHERENCE_CFG)
    outs = [str(tmpdir.join('out_1')), str(tmpdir.join('out_3'))]
    codes = [main(['-q', 'run', cfg_path, '--jobs', jobs, '--replicates=3000', '--out_dir=%s' % out])
             for jobs, out in zip(('1', '3'), outs)]
    assert codes[0] == codes[1]
    assert codes[0] in (EXIT_PASS, EXIT_FAIL)

    for name in ('main.json', 'triple.json'):
        with open(os.path.join(outs[0], name), 'rb') as f1, open(os.path.join(outs[1], name), 'rb') as f2:
            assert f1.read() == f2.read()

    manifests = [read_json(os.path.join(out, MANIFEST_NAME)) for out in outs]
    assert manifests[0]['verdicts'] == manifests[1]['verdicts']
    assert manifests[0]['coherence'] == manifests[1]['coherence']
