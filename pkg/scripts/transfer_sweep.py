""" Graph-transfer sweep

Trains one network per (task, r, hidden, seed) combination and writes a
CSV table of test accuracies followed by the mean accuracy per
(task, r, hidden). Runs are executed in parallel on a process pool, or
serially for debugging purposes.

The default grid checks that crossed rings are easiest and clique-paths
hardest at r in {6, 8}, and that wider GCNs help on rings.
"""
import argparse
import collections
import itertools
import logging
import multiprocessing
import os
import sys

if __name__ == '__main__':
    sys.path.insert(0, os.path.abspath('..'))

from oversquash.exceptions import DivergedLoss
from oversquash.experiments import report, transfer
from oversquash.graph import topologies

RUN_COLUMNS = ('model', 'task', 'r', 'hidden', 'seed', 'accuracy',
               'final_loss', 'diverged')
MEAN_COLUMNS = ('model', 'task', 'r', 'hidden', 'runs', 'mean_accuracy')

Run = collections.namedtuple('Run', ['model', 'task', 'r', 'hidden', 'seed'])


def train_one(run, args):
    """ Train and evaluate a single configuration.

    Parameters
    ----------
    run : Run
        Configuration.
    args : argparse.Namespace
        Script arguments.

    Returns
    -------
    dict
        Row of the run table.
    """
    dataset = transfer.generate_transfer(run.task, run.r, args.n_train,
                                         args.n_test, seed=run.seed)
    row = run._asdict()
    try:
        outcome = transfer.train_transfer(run.model, dataset,
                                          epochs=args.epochs,
                                          hidden=run.hidden, lr=args.lr,
                                          seed=run.seed,
                                          batch_size=args.batch_size)
        row.update(accuracy=outcome.accuracy, final_loss=outcome.losses[-1],
                   diverged=False)
    except DivergedLoss as e:
        logging.warning('{} diverged: {}'.format(run, e))
        losses = e.outcome.losses if e.outcome is not None else list()
        row.update(accuracy=None,
                   final_loss=losses[-1] if losses else None, diverged=True)
    return row


def mean_rows(rows):
    """ Mean accuracy per (model, task, r, hidden) over non-diverged runs. """
    groups = collections.OrderedDict()
    for row in rows:
        key = (row['model'], row['task'], row['r'], row['hidden'])
        groups.setdefault(key, list())
        if row['accuracy'] is not None:
            groups[key].append(row['accuracy'])

    means = list()
    for (model, task, r, hidden), accuracies in groups.items():
        mean = sum(accuracies) / len(accuracies) if accuracies else None
        means.append(dict(model=model, task=task, r=r, hidden=hidden,
                          runs=len(accuracies), mean_accuracy=mean))
    return means


def make_parser():
    """ Configure argument-parser.

    Returns
    -------
    argparse.ArgumentParser
    """
    parser = argparse.ArgumentParser(__doc__)
    parser.add_argument('--models', nargs='+', choices=transfer.MODEL_KINDS,
                        default=[transfer.GCN])
    parser.add_argument('--tasks', nargs='+',
                        choices=topologies.TRANSFER_KINDS,
                        default=list(topologies.TRANSFER_KINDS))
    parser.add_argument('--r', nargs='+', type=int, default=[6, 8],
                        help='Source-target distances (default 6 8).')
    parser.add_argument('--hidden', nargs='+', type=int,
                        default=[transfer.DEFAULT_HIDDEN])
    parser.add_argument('--seeds', type=int, default=5,
                        help='Seeds 0..seeds-1 per configuration (default 5).')
    parser.add_argument('--epochs', type=int, default=transfer.DEFAULT_EPOCHS)
    parser.add_argument('--lr', type=float, default=transfer.DEFAULT_LR)
    parser.add_argument('--batch_size', type=int, default=None)
    parser.add_argument('--n_train', type=int,
                        default=transfer.DEFAULT_N_TRAIN)
    parser.add_argument('--n_test', type=int, default=transfer.DEFAULT_N_TEST)
    parser.add_argument('--n_jobs', default=-1, type=int,
                        help=('Number of concurrent runs, if -1, run '
                              'serially (default -1).'))
    parser.add_argument('-l', '--log', default=None, help='Log file.')
    parser.add_argument('output', help='Output CSV file.')
    return parser


if __name__ == '__main__':
    parser = make_parser()
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, filename=args.log,
                        format='%(asctime)s:%(levelname)s: %(message)s')

    runs = [Run(*combination) for combination in itertools.product(
        args.models, args.tasks, args.r, args.hidden, range(args.seeds))]
    logging.info('Start {} runs.'.format(len(runs)))

    if args.n_jobs == -1:
        rows = [train_one(run, args) for run in runs]
    else:
        pool = multiprocessing.Pool(max([args.n_jobs, 1]))
        jobs = [pool.apply_async(train_one, (run, args)) for run in runs]
        rows = [job.get() for job in jobs]
        pool.close()
        pool.join()

    text = report.format_csv(rows, RUN_COLUMNS) + '\n' + \
        report.format_csv(mean_rows(rows), MEAN_COLUMNS)
    report.write_text(text, args.output)
    logging.info('Wrote {} runs to {}'.format(len(rows), args.output))
