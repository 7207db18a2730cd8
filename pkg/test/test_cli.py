import json
import numpy as np
import pytest
import cli
import dataset


@pytest.fixture
def labeled_csv(tmp_path):
    path = str(tmp_path / 'data.csv')
    assert cli.main(['synth', '--D', '8', '--dims', '2,2', '--counts', '15,20', '--seed', '3', '-o', path]) == 0
    return path


def test_synth_writes_labeled_csv(labeled_csv):
    data = dataset.load_csv(labeled_csv, with_labels=True)
    assert data.dim == 8 and data.count == 35
    assert list(np.bincount(data.labels)) == [15, 20]


def test_synth_default_ambient_dimension(tmp_path):
    path = str(tmp_path / 'full.csv')
    assert cli.main(['synth', '--dims', '2,1', '--counts', '4,3', '-o', path]) == 0
    assert dataset.load_csv(path, with_labels=True).dim == 3


def test_select_document(labeled_csv, tmp_path):
    out = tmp_path / 'exemplars.json'
    code = cli.main(['select', '-i', labeled_csv, '--with-labels', '--k', '5', '--lambda', '1000', '--seed', '1',
                     '-o', str(out)])
    assert code == 0
    document = json.loads(out.read_text())
    assert len(document['indices']) == 5
    assert document['method'] == 'ffs'
    assert document['lambda'] == 1000.0
    assert len(document['trace']) == 5
    assert 0.0 <= document['imbalance'] <= 1.0
    assert document['config']['subcommand'] == 'select'


def test_select_naive_matches_lazy(labeled_csv, tmp_path):
    lazy = tmp_path / 'lazy.json'
    naive = tmp_path / 'naive.json'
    cli.main(['select', '-i', labeled_csv, '--with-labels', '--k', '4', '--seed', '2', '-o', str(lazy)])
    cli.main(['select', '-i', labeled_csv, '--with-labels', '--k', '4', '--seed', '2', '--method', 'ffs-naive',
              '-o', str(naive)])
    assert json.loads(lazy.read_text())['indices'] == json.loads(naive.read_text())['indices']


def test_cluster_outputs(labeled_csv, tmp_path):
    labels_out = tmp_path / 'pred.csv'
    metrics_out = tmp_path / 'metrics.json'
    code = cli.main(['cluster', '-i', labeled_csv, '--with-labels', '--k', '8', '--lambda', '1e4', '--t', '5',
                     '--labels-out', str(labels_out), '--metrics-out', str(metrics_out)])
    assert code == 0
    labels = [int(line) for line in labels_out.read_text().split()]
    assert len(labels) == 35
    document = json.loads(metrics_out.read_text())
    assert document['n_clusters'] == 2
    assert len(document['exemplars']) == 8
    assert document['accuracy'] >= 90.0
    assert set(document) >= {'accuracy', 'fscore', 'imbalance', 'sp_rate', 'zero_codes', 'isolated'}


def test_cluster_without_k_fails(labeled_csv, capsys):
    assert cli.main(['cluster', '-i', labeled_csv, '--with-labels']) == 2
    assert '"error": "ValidationError"' in capsys.readouterr().err


def test_classify_with_selected_exemplars(labeled_csv, tmp_path):
    exemplars = tmp_path / 'exemplars.json'
    metrics_out = tmp_path / 'metrics.json'
    labels_out = tmp_path / 'pred.csv'
    cli.main(['select', '-i', labeled_csv, '--with-labels', '--k', '8', '--lambda', '1e4', '-o', str(exemplars)])
    code = cli.main(['classify', '-i', labeled_csv, '--with-labels', '--exemplars', str(exemplars),
                     '--lambda', '1e4', '--labels-out', str(labels_out), '--metrics-out', str(metrics_out)])
    assert code == 0
    document = json.loads(metrics_out.read_text())
    assert document['correct_rate'] >= 95.0
    assert len(document['exemplars']) == 8


def test_classify_with_exemplar_labels(tmp_path):
    data_path = tmp_path / 'plain.csv'
    data_path.write_text("1,0,0\n0,1,0\n0,0,1\n0.8,0.6,0\n")
    mapping = tmp_path / 'labels.json'
    mapping.write_text(json.dumps({'0': 0, '1': 0, '2': 1}))
    labels_out = tmp_path / 'pred.csv'
    code = cli.main(['classify', '-i', str(data_path), '--exemplar-labels', str(mapping), '--lambda', '1e4',
                     '--labels-out', str(labels_out)])
    assert code == 0
    assert labels_out.read_text().split() == ['0', '0', '1', '0']


def test_eval_reports_accuracy(tmp_path, capsys):
    truth = tmp_path / 'truth.csv'
    pred = tmp_path / 'pred.csv'
    truth.write_text("0\n0\n1\n1\n")
    pred.write_text("1\n1\n0\n1\n")
    assert cli.main(['eval', '--truth', str(truth), '--pred', str(pred)]) == 0
    document = json.loads(capsys.readouterr().out)
    assert document['accuracy'] == 75.0


def test_eval_length_mismatch(tmp_path):
    truth = tmp_path / 'truth.csv'
    pred = tmp_path / 'pred.csv'
    truth.write_text("0\n1\n")
    pred.write_text("0\n")
    assert cli.main(['eval', '--truth', str(truth), '--pred', str(pred)]) == 2


def test_oracle_gauge(capsys):
    assert cli.main(['oracle', '--check', 'gauge', '--trials', '5', '--seed', '1']) == 0
    document = json.loads(capsys.readouterr().out)
    assert document['check'] == 'gauge'
    assert document['max_deviation'] <= 1e-8


def test_oracle_accepts_eq15_alias(capsys):
    assert cli.main(['oracle', '--check', 'eq15', '--trials', '5', '--seed', '1']) == 0
    document = json.loads(capsys.readouterr().out)
    assert document['check'] == 'gauge'
    assert document['config']['check'] == 'eq15'
    assert document['max_deviation'] <= 1e-8


def test_classify_with_infinite_lambda(labeled_csv, tmp_path):
    exemplars = tmp_path / 'exemplars.json'
    metrics_out = tmp_path / 'metrics.json'
    cli.main(['select', '-i', labeled_csv, '--with-labels', '--k', '8', '--lambda', '1e4', '-o', str(exemplars)])
    code = cli.main(['classify', '-i', labeled_csv, '--with-labels', '--exemplars', str(exemplars),
                     '--lambda', 'inf', '--metrics-out', str(metrics_out)])
    assert code == 0
    document = json.loads(metrics_out.read_text())
    assert document['correct_rate'] == 100.0
    assert document['sp_rate'] >= 1.0 - 1e-6
    assert document['config']['lam'] is None


def test_infinite_lambda_only_for_classify(labeled_csv):
    assert cli.main(['select', '-i', labeled_csv, '--k', '3', '--lambda', 'inf']) == 2


def test_lambda_must_exceed_one(labeled_csv):
    assert cli.main(['select', '-i', labeled_csv, '--k', '3', '--lambda', '1']) == 2


def test_missing_input_file(tmp_path):
    assert cli.main(['select', '-i', str(tmp_path / 'missing.csv'), '--k', '3']) == 2


def test_zero_column_in_input(tmp_path, capsys):
    path = tmp_path / 'zero.csv'
    path.write_text("1,0\n0,0\n")
    assert cli.main(['select', '-i', str(path), '--k', '1']) == 2
    assert '"error": "ZeroColumn"' in capsys.readouterr().err


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit):
        cli.main(['bogus'])


def test_every_command_has_help_text():
    parser = cli.build_parser()
    for command, entry in cli.COMMAND_MAP.items():
        assert entry['description']
        assert entry['example'].startswith(command)
    assert parser.prog == 'exsel'


def test_sweep_small(capsys):
    code = cli.main(['sweep', '--D', '6', '--dims', '2,2', '--total', '20', '--splits', '5,10', '--seeds', '1',
                     '--methods', 'ffs,random', '--lambda', '1e3'])
    assert code == 0
    document = json.loads(capsys.readouterr().out)
    assert set(document['accuracy']) == {'ffs', 'random'}
    assert set(document['accuracy']['ffs']) == {'5', '10'}
    assert document['k'] == 8


def test_sweep_rejects_unknown_method():
    assert cli.main(['sweep', '--methods', 'ffs,magic', '--seeds', '1']) == 2


@pytest.mark.slow
def test_imbalanced_two_subspace_sweep(capsys):
    assert cli.main(['sweep', '--lambda', '1e4', '--seeds', '10', '--methods', 'ffs']) == 0
    accuracy = json.loads(capsys.readouterr().out)['accuracy']['ffs']
    for split in accuracy.values():
        assert split['mean'] >= 99.0
