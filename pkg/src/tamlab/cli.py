# pylint: disable=too-many-return-statements
"""Command line entry point.

Subcommands::

    tamlab gen --family trans --mode plain --seed 7 --out data/
    tamlab train experiment.json
    tamlab eval --checkpoint runs/seed-0/checkpoint.json \\
        --split data/split.jsonl --k 1,20 --out metrics.csv
    tamlab viz-embeddings --checkpoint ... --split ... --start 4,4 --out pca.csv
    tamlab selfcheck

Exit codes: 0 success, 1 runtime failure, 2 usage or config error. Every
command writes a manifest with the config, its digest and the digests of
the files read and written.
"""
import argparse
import json
import logging
import os
import sys

import pandas as pd

from tamlab import __version__, enable_default_logger
from tamlab.benchgen import GenConfig
from tamlab.client import LabClient
from tamlab.config import ExperimentConfig
from tamlab.enums import AdaptMethod, Family, Mode, TrainMethod,\
                         check_is_enum
from tamlab.extra.exceptions import ConfigError, TamlabError
from tamlab.extra.utils import canonical_json, sha256_bytes, sha256_file
from tamlab.meta import TamConfig, summarize_trials, write_metrics_csv
from tamlab.plot import show_task_embeddings
from tamlab.selfcheck import run_selfcheck

logger = logging.getLogger(__name__)

MANIFEST_FILE = 'manifest.json'
FAMILY_ALIASES = {
    'class': Family.classification.value,
    'trans': Family.transduction.value,
    'path': Family.pathfinding.value,
}
GEN_FLAGS = ('family', 'mode', 'seed', 'n_train', 'n_val', 'n_test',
             'examples_per_task', 'vocab_size', 'seq_len', 'num_classes',
             'grid_size', 'num_obstacles', 'support_size')


class UsageError(TamlabError):
    """Flags or arguments that do not make sense together."""


def family_arg(value):
    value = FAMILY_ALIASES.get(value, value)
    try:
        return check_is_enum(Family, value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            'unknown family %r, use one of %s' % (
                value, sorted(FAMILY_ALIASES) + [f.value for f in Family])
        ) from None


def int_list(value):
    try:
        out = [int(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            'expected comma separated integers, got %r' % value) from None
    if not out:
        raise argparse.ArgumentTypeError('empty list')
    return out


def cell_arg(value):
    cell = int_list(value)
    if len(cell) != 2:
        raise argparse.ArgumentTypeError('expected ROW,COL, got %r' % value)
    return tuple(cell)


def manifest_path(output):
    """Manifest of a file output sits next to it, ``<stem>.manifest.json``."""
    if os.path.isdir(output):
        return os.path.join(output, MANIFEST_FILE)
    return os.path.splitext(output)[0] + '.' + MANIFEST_FILE


def write_manifest(path, command, config, inputs=(), outputs=()):
    """Record how the outputs were made; no timestamps, so reruns match."""
    record = {
        'tool': 'tamlab',
        'version': __version__,
        'command': command,
        'config': config,
        'config_sha256': sha256_bytes(canonical_json(config)),
        'inputs': {p: sha256_file(p) for p in inputs if p},
        'outputs': {p: sha256_file(p) for p in outputs if p},
    }
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(json.dumps(record, sort_keys=True, indent=2))
        fh.write('\n')
    return path


def _read_json(path):
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(['cannot read %s: %s' % (path, err)]) from None
    if not isinstance(data, dict):
        raise ConfigError(['%s does not hold a JSON object' % path])
    return data


def _tam_config(path):
    cfg = TamConfig.create(**_read_json(path)) if path else TamConfig.create()
    return cfg.check()


def _finished(job):
    """Return ``job`` if it succeeded, raise what made it fail otherwise."""
    if job.is_success():
        return job
    pending = [job]
    while pending:
        current = pending.pop(0)
        if current.error is not None:
            raise current.error
        pending.extend(current.jobs or [])
    raise RuntimeError('[CLI] job %s failed' % job.name)


def cmd_gen(args):
    values = _read_json(args.config) if args.config else {}
    for key in GEN_FLAGS:
        val = getattr(args, key)
        if val is not None:
            values[key] = val
    if 'family' not in values:
        raise UsageError('gen needs --family (or a config file with one)')
    try:
        config = GenConfig.create(**values)
    except ValueError as err:
        raise ConfigError([str(err)]) from None
    if args.print_config:
        print(config.to_json())
        return 0
    config.check()

    client = LabClient()
    data = client.gen(config, out_dir=args.out, jobs=args.jobs,
                      show_progress=args.progress)
    client.run()
    _finished(data)
    summary = data.summary
    print('split: %s' % data.path)
    print('tasks: train %s / val %s / test %s'
          % (summary['n_train'], summary['n_val'], summary['n_test']))
    print('duplicates removed: %s' % summary['duplicates'])
    print('rejections: %s' % json.dumps(
        data.split.stats.get('rejected', {}), sort_keys=True))
    write_manifest(os.path.join(args.out, MANIFEST_FILE), 'gen',
                   config.jsonable(), outputs=[data.path])
    return 0


def cmd_train(args):
    config = ExperimentConfig.from_file(args.config)
    if args.print_config:
        print(config.to_json())
        return 0
    config.check()

    client = LabClient()
    if config.split is not None:
        data = client.load(config.split)
    else:
        data = client.gen(config.benchmark, out_dir=config.output_dir,
                          jobs=args.jobs, show_progress=args.progress)
    client.run()
    split = _finished(data).split
    if config.method == TrainMethod.comp_tam.value and \
            split.config.mode != Mode.comp.value:
        raise ConfigError(['method comp-tam needs a comp mode split, %s is %s'
                           % (data.path, split.config.mode)])

    trainings = [
        client.train(data, config.method,
                     config.tam.replace(seed=seed,
                                        show_progress=args.progress),
                     model_overrides=config.model_overrides(),
                     out_dir=config.trial_dir(seed),
                     name='train-seed-%s' % seed)
        for seed in config.seeds]
    client.run()
    for seed, job in zip(config.seeds, trainings):
        _finished(job)
        write_manifest(
            os.path.join(config.trial_dir(seed), MANIFEST_FILE), 'train',
            dict(config.jsonable(), trial_seed=seed),
            inputs=[data.path], outputs=[job.checkpoint, job.log_path])
        print('seed %s: %s (best validation %s at iteration %s)'
              % (seed, job.checkpoint, job.training.best_metric,
                 job.training.best_iteration))
    if config.split is None:
        write_manifest(os.path.join(config.output_dir, MANIFEST_FILE),
                       'gen', config.benchmark.jsonable(),
                       outputs=[data.path])
    return 0


def cmd_eval(args):
    tam = _tam_config(args.config)
    k_values = args.k if args.k is not None else tam.k_values
    client = LabClient()
    data = client.load(args.split)
    evaluations = [client.evaluate(data, path, tam, k_values=k_values,
                                   method=args.method, label=args.label,
                                   jobs=args.jobs)
                   for path in args.checkpoint]
    client.run()
    frames = [_finished(job).metrics for job in evaluations]
    table = pd.concat(frames, ignore_index=True)
    if len(frames) > 1:
        table = pd.concat([table, summarize_trials(frames)],
                          ignore_index=True)
    write_metrics_csv(table, args.out)
    print(table.to_string(index=False))
    write_manifest(manifest_path(args.out), 'eval',
                   dict(tam.jsonable(), k=k_values, method=args.method),
                   inputs=[args.split] + list(args.checkpoint),
                   outputs=[args.out])
    return 0


def cmd_viz_embeddings(args):
    tam = _tam_config(args.config)
    client = LabClient()
    data = client.load(args.split)
    job = client.project(data, args.checkpoint, tam, start=args.start,
                         role=args.role, k=args.k)
    client.run()
    coords = _finished(job).coords
    coords.to_csv(args.out, index=False, float_format='%.6f')
    outputs = [args.out]
    if args.plot:
        show_task_embeddings(coords, path=args.plot)
        outputs.append(args.plot)
    print('%s tasks projected, explained variance %s'
          % (len(coords), job.projection.explained_variance_ratio))
    write_manifest(manifest_path(args.out), 'viz-embeddings',
                   dict(tam.jsonable(), role=args.role, k=args.k,
                        start=None if args.start is None
                        else list(args.start)),
                   inputs=[args.split, args.checkpoint], outputs=outputs)
    return 0


def cmd_selfcheck(args):
    results = run_selfcheck(seed=args.seed)
    for result in results:
        print(result)
    failed = [r for r in results if not r.passed]
    print('%s of %s checks passed' % (len(results) - len(failed),
                                      len(results)))
    return 1 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog='tamlab', description='Few-shot learning over synthetic '
        'sequence benchmarks with inferred task embeddings.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='debug logging')
    parser.add_argument('--progress', action='store_true',
                        help='show progress bars')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    gen = sub.add_parser('gen', help='generate a benchmark split')
    gen.add_argument('--family', type=family_arg)
    gen.add_argument('--mode', choices=[m.value for m in Mode])
    gen.add_argument('--seed', type=int)
    gen.add_argument('--config', help='JSON file of GenConfig fields')
    gen.add_argument('--out', default='.', help='output directory')
    gen.add_argument('--jobs', type=int, default=1)
    gen.add_argument('--print-config', action='store_true')
    for key in GEN_FLAGS[3:]:
        gen.add_argument('--' + key.replace('_', '-'), type=int, dest=key)
    gen.set_defaults(func=cmd_gen)

    train = sub.add_parser('train', help='train from an experiment config')
    train.add_argument('config', help='JSON experiment config')
    train.add_argument('--jobs', type=int, default=1,
                       help='workers for benchmark generation')
    train.add_argument('--print-config', action='store_true')
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser('eval', help='k-shot evaluation of checkpoints')
    ev.add_argument('--checkpoint', nargs='+', required=True)
    ev.add_argument('--split', required=True)
    ev.add_argument('--k', type=int_list, help='e.g. 1,5,10,20')
    ev.add_argument('--method', choices=[m.value for m in AdaptMethod])
    ev.add_argument('--label', help='method column of the metrics table')
    ev.add_argument('--config', help='JSON file of TamConfig fields')
    ev.add_argument('--out', required=True, help='metrics CSV')
    ev.add_argument('--jobs', type=int, default=1,
                    help='threads adapting test tasks')
    ev.set_defaults(func=cmd_eval)

    viz = sub.add_parser('viz-embeddings',
                         help='PCA of path-finding task embeddings')
    viz.add_argument('--checkpoint', required=True)
    viz.add_argument('--split', required=True)
    viz.add_argument('--start', type=cell_arg, help='ROW,COL filter')
    viz.add_argument('--role', default='train',
                     choices=['train', 'val', 'test'])
    viz.add_argument('--k', type=int)
    viz.add_argument('--config', help='JSON file of TamConfig fields')
    viz.add_argument('--out', required=True, help='coordinates CSV')
    viz.add_argument('--plot', help='also save a scatter plot here')
    viz.set_defaults(func=cmd_viz_embeddings)

    check = sub.add_parser('selfcheck', help='run built-in checks')
    check.add_argument('--seed', type=int, default=0)
    check.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None):
    """Run the command line; return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code
    enable_default_logger(logging.DEBUG if args.verbose else logging.INFO)
    if getattr(args, 'jobs', 1) < 1:
        parser.print_usage(sys.stderr)
        print('tamlab: error: --jobs must be >= 1', file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, ConfigError) as err:
        parser.print_usage(sys.stderr)
        print('tamlab: error: %s' % err, file=sys.stderr)
        return 2
    except Exception as err:  # pylint: disable=broad-except
        logger.debug('[CLI] failure', exc_info=True)
        print('tamlab: %s: %s' % (type(err).__name__, err), file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
