import os
import shutil

import numpy as np
import pandas as pd
import pytest

import synprune as sp
from synprune import harness, metrics
from synprune.scripts import cli
from synprune.tests.helpers import write_synthetic_csv

WIDTHS = '27,6,4,1'
TOTAL = 27 * 6 + 6 * 4 + 4


def small_config(tmpdir, **changes):
    dataset = write_synthetic_csv(tmpdir.join('heart.csv'), n=120)
    options = dict(dataset=dataset, output_dir=str(tmpdir.join('results')),
                   layer_widths=WIDTHS, epochs=6, stop_delay=1, batch_size=16,
                   learning_rate=0.05, seeds='0:2', thresholds='0.8,0.95',
                   n_targets=3, random_count=3)
    options.update(changes)
    return sp.ExperimentConfig(**options)


def file_bytes(run_dir):
    out = {}
    for name in sorted(os.listdir(run_dir)):
        with open(os.path.join(run_dir, name), 'rb') as f:
            out[name] = f.read()
    return out


class TestRunExperiment:
    @pytest.fixture(autouse=True)
    def setup(self, tmpdir):
        self.tmpdir = tmpdir
        self.cfg = small_config(tmpdir)

    def test_dense(self):
        result = sp.run_experiment(self.cfg, 0, 'dense')
        assert result.status == 'ok'
        assert result.threshold is None
        assert result.name == 'dense-any-s0'
        assert result.summary['final_sparsity'] == 0.0
        assert result.events == []
        assert len(result.trace) == 6

    def test_subnet_only(self):
        result = sp.run_experiment(self.cfg, 1, 'subnet_only', 0.9)
        walk = sp.init_subnetwork_mask(self.cfg.architecture, 1)
        assert result.final.mask == walk
        assert result.summary['final_sparsity'] >= (TOTAL - 37.0) / TOTAL
        assert result.summary['redundant_connections'] == 0

    def test_summary_from_trace(self):
        result = sp.run_experiment(self.cfg, 0, 'strategic_synth_prune', 0.95)
        s = result.summary
        acc = result.trace['val_accuracy']
        assert s['final_val_accuracy'] == acc.iloc[-1]
        assert s['min_val_accuracy'] == acc.min()
        assert s['max_val_accuracy'] == acc.max()
        assert s['epochs_completed'] == 6

    @pytest.mark.parametrize('strategy', ['random_synth_prune',
                                          'strategic_synth_prune'])
    @pytest.mark.parametrize('threshold', [0.8, 0.95])
    def test_budget_and_order(self, strategy, threshold):
        result = sp.run_experiment(self.cfg, 0, strategy, threshold)
        budget = sp.enabled_budget(threshold, TOTAL)
        floor = 1 - budget / float(TOTAL)
        last = {}
        for event in result.events:
            assert len(event) > 0
            assert event.sparsity_after >= floor - 1e-12
            assert event.epoch < self.cfg.epochs - self.cfg.stop_delay
            if event.kind == 'synthesize':
                last[event.epoch] = 'synthesize'
            else:
                # no prune after a synthesis of the same epoch
                assert last.get(event.epoch) != 'synthesize'
        assert result.final.mask.enabled_count <= budget

    def test_random_synth_at_high_threshold(self):
        # the walk mask already holds more connections than the 0.95 budget
        result = sp.run_experiment(self.cfg, 0, 'random_synth', 0.95)
        assert result.summary['synthesize_events'] == 0

    def test_shared_initialisation(self):
        out = str(self.tmpdir.join('shared'))
        dirs = {}
        for strategy in sp.Strategy:
            result = sp.run_experiment(self.cfg, 0, strategy, 0.8)
            dirs[strategy.value] = harness.write_run(result, out)
        initial = dict((s, file_bytes(d)['initial.net'])
                       for s, d in dirs.items())
        assert initial['dense'] == initial['prune_only']
        family = ['subnet_only', 'random_synth', 'strategic_synth',
                  'random_synth_prune', 'strategic_synth_prune']
        assert len(set(initial[s] for s in family)) == 1
        dense = sp.read_network(os.path.join(dirs['dense'], 'initial.net'))
        walk = sp.read_network(os.path.join(dirs['subnet_only'],
                                            'initial.net'))
        for w, v, m in zip(dense.weights, walk.weights, walk.mask.layers):
            assert np.array_equal(w[m], v[m])

    def test_deterministic_files(self):
        dirs = []
        for name in ('a', 'b'):
            result = sp.run_experiment(self.cfg, 1, 'strategic_synth', 0.8)
            dirs.append(harness.write_run(result, str(self.tmpdir.join(name))))
        assert file_bytes(dirs[0]) == file_bytes(dirs[1])

    def test_read_back(self):
        result = sp.run_experiment(self.cfg, 0, 'random_synth', 0.8)
        run_dir = harness.write_run(result, str(self.tmpdir.join('rt')))
        back = sp.read_run(run_dir)
        assert back.name == result.name
        assert back.config == self.cfg
        assert back.events == result.events
        assert back.final.mask == result.final.mask
        assert back.summary == result.summary

    def test_divergence_recorded(self, monkeypatch):
        def diverge(net, data, cfg, hooks=()):
            raise sp.DivergenceError('loss became nan at epoch 2, batch 1',
                                     2, 1, metrics.trace_frame([]), [])

        monkeypatch.setattr(harness, 'train', diverge)
        with pytest.warns(UserWarning):
            result = sp.run_experiment(self.cfg, 0, 'dense')
        assert result.status == 'failed'
        assert 'epoch 2' in result.message
        run_dir = harness.write_run(result, str(self.tmpdir.join('failed')))
        assert sp.read_run(run_dir).status == 'failed'


@pytest.fixture(scope='class')
def swept(tmpdir_factory):
    cfg = small_config(tmpdir_factory.mktemp('sweep'))
    summary, results = sp.sweep(cfg)
    return cfg, summary, results


class TestSweep:
    @pytest.fixture(autouse=True)
    def setup(self, swept, tmpdir):
        self.cfg, self.summary, self.results = swept
        self.tmpdir = tmpdir

    def test_grid_complete(self):
        cells = harness.grid(self.cfg)
        # 5 threshold-dependent strategies x 2 thresholds + 2 x 'any'
        assert len(cells) == (5 * 2 + 2) * 2
        names = sorted(r.name for r in self.results)
        assert names == sorted(harness.run_name(*c) for c in cells)
        dirs = [d for d in os.listdir(self.cfg.output_dir)
                if os.path.isdir(os.path.join(self.cfg.output_dir, d))]
        assert sorted(dirs) == names

    def test_summary(self):
        assert self.summary['mean_accuracy'].dims == ('strategy', 'threshold')
        assert list(self.summary['threshold'].values) == [0.8, 0.95]
        for strategy in self.cfg.strategies:
            for threshold in self.cfg.thresholds:
                finals = [r.summary['final_val_accuracy']
                          for r in self.results
                          if r.strategy.value == strategy and
                          r.threshold in (None, threshold)]
                cell = self.summary.sel(strategy=strategy,
                                        threshold=threshold)
                assert int(cell['n_runs']) == 2
                assert abs(float(cell['mean_accuracy']) -
                           np.mean(finals)) < 1e-12
                assert float(cell['max_accuracy']) == max(finals)

    def test_threshold_independent_rows(self):
        for strategy in ('dense', 'subnet_only'):
            row = self.summary['mean_accuracy'].sel(strategy=strategy).values
            assert row[0] == row[1]

    def test_sweep_csv_repeatable(self):
        path = os.path.join(self.cfg.output_dir, harness.SWEEP_FILE)
        first = open(path).read()
        sp.sweep(self.cfg)
        assert open(path).read() == first

    def test_parallel_same_as_serial(self):
        path = os.path.join(self.cfg.output_dir, harness.SWEEP_FILE)
        serial = open(path).read()
        cfg = self.cfg.replace(output_dir=str(self.tmpdir.join('parallel')))
        sp.sweep(cfg, workers=2)
        assert open(os.path.join(cfg.output_dir,
                                 harness.SWEEP_FILE)).read() == serial

    def test_report(self):
        out = str(self.tmpdir.join('report'))
        tables = sp.report(self.cfg.output_dir, threshold=0.8, out_dir=out)
        for name in ('table_means', 'table_max_accuracy', 'table_max_auc',
                     'table_false_starts', 'boxplot'):
            assert os.path.isfile(os.path.join(out, name + '.csv'))
        means = tables['table_means']
        assert list(means.index) == [s.value for s in sp.Strategy]
        assert np.isclose(means.loc['dense', 'mean_accuracy'],
                          float(self.summary['mean_accuracy'].sel(
                              strategy='dense', threshold=0.8)))
        maxacc = tables['table_max_accuracy']
        assert maxacc.shape == (7, 2)
        starts = tables['table_false_starts']
        assert (starts['min_accuracy'] <= starts['mean_min_accuracy']).all()
        notes = open(os.path.join(out, 'notes.txt')).read()
        assert 'random_synth: 0 synthesize events' in notes

    def test_report_bad_threshold(self):
        with pytest.raises(ValueError):
            sp.report(self.cfg.output_dir, threshold=0.5,
                      out_dir=str(self.tmpdir.join('r')))

    def test_report_corrupt(self):
        results = str(self.tmpdir.join('copy'))
        shutil.copytree(self.cfg.output_dir, results)
        victim = os.path.join(results, 'dense-any-s0', 'summary.yml')
        with open(victim, 'w') as f:
            f.write('status: [unclosed\n')
        out = str(self.tmpdir.join('report'))
        with pytest.raises(ValueError) as excinfo:
            sp.report(results, out_dir=out)
        assert victim in str(excinfo.value)
        assert not os.path.exists(out)

    def test_similarity_report(self):
        matrix = sp.similarity_report(self.cfg.output_dir,
                                      out_dir=str(self.tmpdir.join('sim')))
        values = matrix.values
        assert values.shape == (7, 7)
        assert np.array_equal(values, values.T)
        assert np.all(np.diag(values) == 1)
        table = pd.read_csv(str(self.tmpdir.join('sim',
                                                 'similarity_jaccard.csv')),
                            index_col=0)
        assert table.index.name == 'jaccard'
        assert list(table.columns) == list(matrix['run'].values)

    def test_representatives(self):
        chosen = harness.select_representatives(self.results)
        assert [r.strategy.value for r in chosen] == \
            [s.value for s in sp.Strategy]
        for r in chosen:
            best = max(o.summary['final_val_accuracy'] for o in self.results
                       if o.strategy == r.strategy)
            assert r.summary['final_val_accuracy'] == best

    def test_similarity_same_run(self):
        name = 'subnet_only-any-s0'
        matrix = sp.similarity_report(self.cfg.output_dir, [name, name],
                                      metric='overlap')
        assert np.all(matrix.values == 1)

    def test_similarity_recompute(self):
        names = ['subnet_only-any-s0', 'subnet_only-any-s1',
                 'strategic_synth-0.8-s0']
        matrix = sp.similarity_report(self.cfg.output_dir, names)
        masks = [sp.read_network(os.path.join(self.cfg.output_dir, n,
                                              'final.net')).mask
                 for n in names]
        for i in range(3):
            for j in range(3):
                assert matrix.values[i, j] == sp.mask_similarity(masks[i],
                                                                 masks[j])

    def test_similarity_unknown_run(self):
        with pytest.raises(KeyError):
            sp.similarity_report(self.cfg.output_dir, ['nope-any-s0',
                                                       'dense-any-s0'])


class TestAggregation:
    def test_two_runs(self):
        runs = pd.DataFrame([
            {'run': 'a', 'strategy': 'prune_only', 'threshold': 0.9,
             'seed': 0, 'status': 'ok', 'final_val_accuracy': 0.8,
             'final_val_auc': 0.7, 'final_sparsity': 0.9,
             'min_val_accuracy': 0.5},
            {'run': 'b', 'strategy': 'prune_only', 'threshold': 0.9,
             'seed': 1, 'status': 'ok', 'final_val_accuracy': 0.9,
             'final_val_auc': 0.8, 'final_sparsity': 0.9,
             'min_val_accuracy': 0.6},
            {'run': 'c', 'strategy': 'prune_only', 'threshold': 0.9,
             'seed': 2, 'status': 'failed', 'final_val_accuracy': 0.1,
             'final_val_auc': 0.1, 'final_sparsity': 0.9,
             'min_val_accuracy': 0.1},
        ])
        summary = harness.summarize(runs, ['prune_only'], [0.9])
        cell = summary.sel(strategy='prune_only', threshold=0.9)
        assert np.isclose(float(cell['mean_accuracy']), 0.85)
        assert float(cell['max_accuracy']) == 0.9
        assert int(cell['n_runs']) == 3
        assert int(cell['n_failed']) == 1

    @pytest.mark.parametrize('changes', [
        {'thresholds': '0.99,0.990001'}, {'seeds': '0,1,0'}])
    def test_run_name_clash(self, tmpdir, changes):
        cfg = small_config(tmpdir, **changes)
        with pytest.raises(ValueError) as excinfo:
            harness.grid(cfg)
        assert 's0' in str(excinfo.value)
        with pytest.raises(ValueError):
            sp.sweep(cfg)
        assert not os.path.exists(cfg.output_dir)

    def test_close_thresholds_apart(self, tmpdir):
        cfg = small_config(tmpdir, thresholds='0.99,0.991',
                           strategies='prune_only')
        names = [harness.run_name(*c) for c in harness.grid(cfg)]
        assert len(set(names)) == len(names) == 4

    def test_empty_dir(self, tmpdir):
        with pytest.raises(IOError):
            sp.report(str(tmpdir))
        assert os.listdir(str(tmpdir)) == []


class TestCLI:
    @pytest.fixture(autouse=True)
    def setup(self, tmpdir, monkeypatch):
        monkeypatch.delenv('SYNPRUNE_CONFIG', raising=False)
        monkeypatch.delenv('SYNPRUNE_WORKERS', raising=False)
        self.tmpdir = tmpdir
        self.dataset = write_synthetic_csv(tmpdir.join('heart.csv'), n=120)
        self.out = str(tmpdir.join('results'))
        self.common = ['--dataset', self.dataset, '--output_dir', self.out,
                       '--layer_widths', WIDTHS, '--epochs', '4',
                       '--stop_delay', '1', '--batch_size', '16']

    def test_train_and_dag_prune(self, capsys):
        code = cli.main(['train', '--strategy', 'strategic_synth_prune',
                         '--sparsity_threshold', '0.9', '--seed', '2'] +
                        self.common)
        assert code == 0
        run_dir = os.path.join(self.out, 'strategic_synth_prune-0.9-s2')
        assert os.path.isfile(os.path.join(run_dir, 'final.net'))
        assert 'final_val_accuracy' in capsys.readouterr().out
        pruned = str(self.tmpdir.join('pruned.net'))
        assert cli.main(['dag-prune', os.path.join(run_dir, 'final.net'),
                         pruned]) == 0
        net = sp.read_network(pruned)
        assert sp.find_redundant(net.mask, net.architecture) == []

    def test_sweep_and_report(self, capsys):
        assert cli.main(['sweep', '--strategies', 'dense,prune_only',
                         '--thresholds', '0.9', '--seeds', '0:2'] +
                        self.common) == 0
        assert cli.main(['report', self.out]) == 0
        assert os.path.isfile(os.path.join(self.out, 'table_means.csv'))
        assert cli.main(['similarity', self.out, '--metric', 'overlap']) == 0
        assert os.path.isfile(os.path.join(self.out,
                                           'similarity_overlap.csv'))

    def test_similarity_metric_from_config(self, monkeypatch):
        assert cli.main(['sweep', '--strategies', 'dense,subnet_only',
                         '--seeds', '0'] + self.common) == 0
        user = str(self.tmpdir.join('user.yml'))
        with open(user, 'w') as f:
            f.write('similarity_metric: overlap\n')
        assert cli.main(['similarity', self.out, '--config', user]) == 0
        assert os.path.isfile(os.path.join(self.out,
                                           'similarity_overlap.csv'))
        assert not os.path.exists(os.path.join(self.out,
                                               'similarity_jaccard.csv'))
        # the environment layer is read too, and the flag beats both
        monkeypatch.setenv('SYNPRUNE_CONFIG', user)
        sim = str(self.tmpdir.join('sim'))
        assert cli.main(['similarity', self.out, '-o', sim]) == 0
        assert os.listdir(sim) == ['similarity_overlap.csv']
        assert cli.main(['similarity', self.out, '-o', sim,
                         '--metric', 'jaccard']) == 0
        assert os.path.isfile(os.path.join(sim, 'similarity_jaccard.csv'))

    def test_error_exit(self):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(['report', str(self.tmpdir.join('nothing'))])
        assert excinfo.value.code == 1
