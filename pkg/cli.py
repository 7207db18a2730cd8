import sys
import logging
import argparse
import traceback
import numpy as np
from constants import *
from models import RunConfig, SubspaceSpec, SelectionMethods, Checks, ExemplarSet, LabeledExemplars
from lib.errors import ExselError, ValidationError
from lib.helpers import parse_int_list, read_json, write_json, write_labels, read_labels, dump_json
import dataset
import ffs
import cluster
import classify
import metrics
import geometry

FORMAT = LOG_FORMAT
logging.basicConfig(format=FORMAT)
logger = logging.getLogger('exsel.cli')

SSC_METHOD = 'ssc'


def load_data(config):
    data = dataset.load_csv(config.input, config.with_labels)
    logger.info("Loaded " + str(data) + " from " + config.input)
    return dataset.preprocess(data, config.pca)


def exemplar_metrics(data, pred, exemplar_indices, codes, with_imbalance=True):
    if data.labels is None:
        return metrics.metrics_report()
    counts = ffs.class_counts(exemplar_indices, data.labels, data.classes()) if with_imbalance else None
    return metrics.metrics_report(data.labels, pred, counts, codes, data.labels[list(exemplar_indices)])


def resolve_n_clusters(config, data):
    if config.n_clusters is not None:
        return config.n_clusters
    if data.labels is None:
        raise ValidationError("--n-clusters is required for unlabeled data")
    return len(data.classes())


def handle_synth(config):
    dims = parse_int_list(config.dims)
    counts = parse_int_list(config.counts)
    ambient = config.D if config.D is not None else sum(dims)
    data = dataset.synth_union_of_subspaces(SubspaceSpec(ambient, dims, counts, config.sigma, config.seed))
    dataset.save_csv(data, config.output, with_labels=True)


def handle_select(config):
    if config.k is None:
        raise ValidationError("--k is required")
    data = load_data(config)
    exemplars = ffs.select_exemplars(data, config.method, config.k, config.seed, config.lam, config.tol,
                                     config.max_iter, config.first_index, config.threads)
    document = exemplars.to_dict()
    document['imbalance'] = None
    if data.labels is not None and len(exemplars):
        document['imbalance'] = metrics.imbalance(ffs.class_counts(exemplars, data.labels, data.classes()))
    document['config'] = config.as_dict()
    write_json(document, config.output)


def handle_cluster(config):
    data = load_data(config)
    n_clusters = resolve_n_clusters(config, data)
    if config.method == SSC_METHOD:
        assignment = cluster.ssc_pipeline(data, config.lam, config.t, n_clusters, config.seed, config.tol,
                                          config.max_iter, config.threads)
        exemplar_indices = list(range(data.count))
    else:
        if config.k is None:
            raise ValidationError("--k is required for exemplar-based clustering")
        assignment = cluster.esc_pipeline(data, config.lam, config.k, config.t, n_clusters, config.seed,
                                          config.tol, config.max_iter, config.method, config.first_index,
                                          config.threads)
        exemplar_indices = assignment.exemplars.indices
    write_labels(assignment.labels, config.labels_out)
    document = exemplar_metrics(data, assignment.labels, exemplar_indices, assignment.codes,
                                with_imbalance=config.method != SSC_METHOD)
    document['n_clusters'] = n_clusters
    document['exemplars'] = list(exemplar_indices) if config.method != SSC_METHOD else None
    document['zero_codes'] = assignment.report['zero_codes']
    document['isolated'] = assignment.report['isolated']
    document['config'] = config.as_dict()
    if config.metrics_out is not None:
        write_json(document, config.metrics_out)


def handle_classify(config):
    data = load_data(config)
    if config.exemplar_labels is not None:
        labeled = LabeledExemplars.from_mapping(read_json(config.exemplar_labels))
    else:
        if config.exemplars is not None:
            indices = ExemplarSet.from_dict(read_json(config.exemplars)).indices
        elif config.k is not None:
            if np.isinf(config.lam):
                raise ValidationError("Selecting exemplars with --k needs a finite --lambda")
            indices = ffs.select_exemplars(data, config.method, config.k, config.seed, config.lam, config.tol,
                                           config.max_iter, config.first_index, config.threads).indices
        else:
            raise ValidationError("Give --exemplar-labels, --exemplars or --k")
        labeled = LabeledExemplars.from_dataset(data, indices, data.classes())
    if any(not 0 <= index < data.count for index in labeled.indices):
        raise ValidationError("Exemplar index out of range for " + str(data.count) + " points")

    assignment = classify.src_classify(data, labeled, config.lam, config.tol, config.max_iter, config.threads)
    write_labels(assignment.labels, config.labels_out)

    rest = np.setdiff1d(np.arange(data.count), labeled.indices)
    document = metrics.metrics_report()
    document['correct_rate'] = None
    if data.labels is not None:
        counts = [len(labeled.members(label)) for label in labeled.classes]
        document = metrics.metrics_report(data.labels[rest], assignment.labels[rest], counts,
                                          [assignment.codes[j] for j in rest], labeled.labels())
        document['correct_rate'] = 100.0 * float(np.mean(data.labels[rest] == assignment.labels[rest])) \
            if rest.size else None
    document['exemplars'] = list(labeled.indices)
    document['config'] = config.as_dict()
    if config.metrics_out is not None:
        write_json(document, config.metrics_out)


def handle_eval(config):
    truth = read_labels(config.truth)
    pred = read_labels(config.pred)
    document = metrics.metrics_report(truth, pred)
    document['config'] = config.as_dict()
    write_json(document, config.output)


def handle_oracle(config):
    check = Checks(config.check)
    if check == Checks.gauge:
        document = geometry.audit_gauge(config.trials, config.seed)
    elif check == Checks.covering:
        document = geometry.audit_covering(config.trials, config.seed, n_jobs=config.threads)
    elif check == Checks.lasso:
        document = geometry.audit_lasso(config.trials, config.seed, tol=config.tol)
    else:
        document = geometry.audit_threshold(config.trials, config.seed, tol=config.tol)
    document['config'] = config.as_dict()
    write_json(document, config.output)


def handle_sweep(config):
    dims = parse_int_list(config.dims)
    splits = parse_int_list(config.splits)
    methods = [method for method in config.methods.replace(' ', '').split(',') if method]
    for method in methods:
        if method != SSC_METHOD and method not in [known.value for known in SelectionMethods]:
            raise ValidationError("Unknown method " + method)
    k = config.k if config.k is not None else sum(dims) + 4
    results = {}
    for method in methods:
        results[method] = {}
        for split in splits:
            if not 0 < split < config.total:
                raise ValidationError("Split " + str(split) + " must lie strictly between 0 and " + str(config.total))
            accuracies = []
            for seed in range(config.seed, config.seed + config.seeds):
                spec = SubspaceSpec(config.D, dims, [split, config.total - split], config.sigma, seed)
                data = dataset.synth_union_of_subspaces(spec)
                if method == SSC_METHOD:
                    assignment = cluster.ssc_pipeline(data, config.lam, config.t, len(dims), seed, config.tol,
                                                      config.max_iter, config.threads)
                else:
                    assignment = cluster.esc_pipeline(data, config.lam, k, config.t, len(dims), seed, config.tol,
                                                      config.max_iter, method, None, config.threads)
                accuracies.append(metrics.clustering_accuracy(data.labels, assignment.labels))
            results[method][str(split)] = {'mean': float(np.mean(accuracies)), 'per_seed': accuracies}
            logger.info(method + " split " + str(split) + ": mean accuracy " + str(np.mean(accuracies)))
    write_json({'accuracy': results, 'k': k, 'config': config.as_dict()}, config.output)


def add_common(parser):
    parser.add_argument('--seed', type=int, default=0, help="seed for every random choice")
    parser.add_argument('--threads', type=int, default=None, help="cap on worker threads")
    parser.add_argument('--verbose', action='store_true', help="debug logging")
    parser.add_argument('--output', '-o', default=None, help="output path (stdout when omitted)")


def add_solver(parser):
    parser.add_argument('--lambda', dest='lam', type=float, default=DEFAULT_LAMBDA,
                        help="greater than 1; classify also takes inf for exact codes")
    parser.add_argument('--tol', type=float, default=DEFAULT_TOL, help="duality gap tolerance")
    parser.add_argument('--max-iter', dest='max_iter', type=int, default=DEFAULT_MAX_ITER)


def add_data(parser):
    parser.add_argument('--input', '-i', required=True, help="CSV, one row per point")
    parser.add_argument('--with-labels', dest='with_labels', action='store_true',
                        help="CSV has a header and a final integer label column")
    parser.add_argument('--pca', type=int, default=None, help="project to this dimension before normalizing")


def add_selection(parser, methods):
    parser.add_argument('--k', type=int, default=None, help="number of exemplars")
    parser.add_argument('--method', choices=methods, default=SelectionMethods.ffs.value)
    parser.add_argument('--first-index', dest='first_index', type=int, default=None)


def add_synth_arguments(parser):
    parser.add_argument('--D', type=int, default=None, help="ambient dimension (default: sum of dims)")
    parser.add_argument('--dims', required=True, help="comma separated subspace dimensions")
    parser.add_argument('--counts', required=True, help="comma separated points per subspace")
    parser.add_argument('--sigma', type=float, default=0.0, help="noise standard deviation")


def add_select_arguments(parser):
    add_data(parser)
    add_solver(parser)
    add_selection(parser, [method.value for method in SelectionMethods])


def add_cluster_arguments(parser):
    add_data(parser)
    add_solver(parser)
    add_selection(parser, [method.value for method in SelectionMethods] + [SSC_METHOD])
    parser.add_argument('--t', type=int, default=DEFAULT_T, help="neighbors per point")
    parser.add_argument('--n-clusters', dest='n_clusters', type=int, default=None)
    parser.add_argument('--labels-out', dest='labels_out', default=None)
    parser.add_argument('--metrics-out', dest='metrics_out', default=None)


def add_classify_arguments(parser):
    add_data(parser)
    add_solver(parser)
    add_selection(parser, [method.value for method in SelectionMethods])
    parser.add_argument('--exemplars', default=None, help="exemplar JSON written by select")
    parser.add_argument('--exemplar-labels', dest='exemplar_labels', default=None,
                        help='JSON {"index": class, ...}')
    parser.add_argument('--labels-out', dest='labels_out', default=None)
    parser.add_argument('--metrics-out', dest='metrics_out', default=None)


def add_eval_arguments(parser):
    parser.add_argument('--truth', required=True, help="labels file, one integer per line")
    parser.add_argument('--pred', required=True, help="labels file, one integer per line")


def add_oracle_arguments(parser):
    parser.add_argument('--check', required=True, choices=[check.value for check in Checks] + sorted(CHECK_ALIASES))
    parser.add_argument('--trials', type=int, default=100)
    parser.add_argument('--tol', type=float, default=DEFAULT_TOL)


def add_sweep_arguments(parser):
    add_solver(parser)
    parser.add_argument('--D', type=int, default=5)
    parser.add_argument('--dims', default='3,3')
    parser.add_argument('--total', type=int, default=100)
    parser.add_argument('--splits', default='10,20,30,40,50')
    parser.add_argument('--seeds', type=int, default=10, help="number of seeds per split")
    parser.add_argument('--sigma', type=float, default=0.0)
    parser.add_argument('--k', type=int, default=None, help="exemplars (default: sum of dims + 4)")
    parser.add_argument('--t', type=int, default=DEFAULT_T)
    parser.add_argument('--methods', default='ffs,random,ssc')


COMMAND_MAP = {
    'synth': {
        'handler': handle_synth,
        'arguments': add_synth_arguments,
        'description': "Sample points from a union of random subspaces",
        'example': "synth --D 5 --dims 3,3 --counts 10,90 --seed 7 -o data.csv"
    },
    'select': {
        'handler': handle_select,
        'arguments': add_select_arguments,
        'description': "Select exemplars by farthest-first search (or a baseline)",
        'example': "select -i data.csv --with-labels --k 10 --lambda 1e4 -o exemplars.json"
    },
    'cluster': {
        'handler': handle_cluster,
        'arguments': add_cluster_arguments,
        'description': "Cluster with codes over selected exemplars",
        'example': "cluster -i data.csv --with-labels --k 10 --lambda 1e4 --labels-out pred.csv "
                   "--metrics-out metrics.json"
    },
    'classify': {
        'handler': handle_classify,
        'arguments': add_classify_arguments,
        'description': "Label every point by the class of smallest reconstruction residual",
        'example': "classify -i data.csv --with-labels --exemplars exemplars.json --lambda 1e4 "
                   "--labels-out pred.csv"
    },
    'eval': {
        'handler': handle_eval,
        'arguments': add_eval_arguments,
        'description': "Compare two label files",
        'example': "eval --truth truth.csv --pred pred.csv"
    },
    'oracle': {
        'handler': handle_oracle,
        'arguments': add_oracle_arguments,
        'description': "Run a geometric cross-check audit",
        'example': "oracle --check gauge --trials 100"
    },
    'sweep': {
        'handler': handle_sweep,
        'arguments': add_sweep_arguments,
        'description': "Accuracy across imbalanced two-subspace splits",
        'example': "sweep --lambda 1e4 --seeds 10 --methods ffs,random,ssc"
    }
}


def build_parser():
    parser = argparse.ArgumentParser(prog='exsel', description="Exemplar selection, clustering and classification")
    subparsers = parser.add_subparsers(dest='subcommand', required=True)
    for command in COMMAND_MAP:
        sub = subparsers.add_parser(command, help=COMMAND_MAP[command]['description'],
                                    epilog="Example: " + COMMAND_MAP[command]['example'])
        COMMAND_MAP[command]['arguments'](sub)
        add_common(sub)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.getLogger('exsel').setLevel(logging.DEBUG if args.verbose else logging.INFO)
    logger.debug("Looking for " + args.subcommand + " in map")
    try:
        config = RunConfig.from_namespace(args)
        COMMAND_MAP[args.subcommand]['handler'](config)
        return 0
    except ExselError as e:
        logger.error("Failed to run " + args.subcommand + " because " + str(e))
        sys.stderr.write(dump_json({'error': type(e).__name__, 'message': str(e)}))
        return e.exit_code
    except OSError as e:
        logger.error("Failed to run " + args.subcommand + " because " + str(e))
        sys.stderr.write(dump_json({'error': type(e).__name__, 'message': str(e)}))
        return 2
    except Exception as e:
        logger.error("Failed to run " + args.subcommand + " because " + str(e))
        logger.error(traceback.format_exc())
        sys.stderr.write(dump_json({'error': type(e).__name__, 'message': str(e)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
