import argparse
import typing
from functools import cached_property

import numpy as np

from gsbm_lab.builders import load_spec
from gsbm_lab.cli.declare import COMMANDS
from gsbm_lab.exceptions import ConfigError

SWEEP_PARAMS = ('n', 'D', 'gamma', 'eta', 'lambda')
INT_PARAMS = ('n', 'D')


class RunConfig(typing.NamedTuple):
    command: str
    # decoded model spec, None for commands that take no model
    model: typing.Optional[dict]
    params: dict
    output: typing.Optional[str]
    format: str
    tolerances: dict

    def as_dict(self):
        return self._asdict()


def parse_tolerance(text):
    name, sep, value = text.partition('=')
    if not sep:
        raise argparse.ArgumentTypeError('--tol expects name=value, got %r' % text)
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError('--tol value for %s is not a number: %r' % (name, value))


def parse_sweep(text):
    """``param:start:stop:steps`` -> (param, grid)."""
    parts = text.split(':')
    if len(parts) != 4:
        raise ConfigError('--sweep expects param:start:stop:steps, got %r' % text)
    param, start, stop, steps = parts
    if param not in SWEEP_PARAMS:
        raise ConfigError('cannot sweep %r (choose from %s)' % (param, ', '.join(SWEEP_PARAMS)))
    try:
        start, stop, steps = float(start), float(stop), int(steps)
    except ValueError:
        raise ConfigError('--sweep bounds must be numbers and steps an integer, got %r' % text)
    if steps < 1:
        raise ConfigError('sweep grid for %s is empty' % param)
    grid = np.linspace(start, stop, steps)
    if param in INT_PARAMS:
        grid = list(dict.fromkeys(int(round(value)) for value in grid))
    else:
        grid = [float(value) for value in grid]
    return param, grid


def parse_grid(text):
    """Comma list ``1,2,5`` or ``start:stop:steps``."""
    try:
        if ':' in text:
            start, stop, steps = text.split(':')
            grid = np.linspace(float(start), float(stop), int(steps)).tolist()
        else:
            grid = [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise ConfigError('cannot parse grid %r' % text)
    if not grid:
        raise ConfigError('grid %r is empty' % text)
    return grid


class Resolver:
    """Turns argv into a RunConfig and the command function that runs it."""

    @cached_property
    def common(self):
        parser = argparse.ArgumentParser(add_help=False)
        parser.add_argument('--model', help='JSON file, inline JSON or shorthand such as sbm:k=2,alpha=3,beta=1')
        parser.add_argument('--n', type=int, help='population size')
        parser.add_argument('--D', type=int, help='coordinate degree')
        parser.add_argument('--samples', type=int, help='Monte Carlo sample count')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--eta', type=float)
        parser.add_argument('--gamma', type=float, help='sets eta = gamma / sqrt(n) when --eta is absent')
        parser.add_argument('--out', help='output path, stdout by default')
        parser.add_argument('--format', choices=('json', 'csv'), default='json')
        parser.add_argument('--tol', type=parse_tolerance, action='append', default=[], metavar='NAME=VALUE')
        parser.add_argument('--log-level', default='WARNING',
                            choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'))
        return parser

    @cached_property
    def parser(self):
        parser = argparse.ArgumentParser(prog='gsbm-lab', description='Low-degree hardness analysis of GSBMs')
        subparsers = parser.add_subparsers(dest='command', required=True)
        for name, fn in COMMANDS.items():
            sub = subparsers.add_parser(name, parents=[self.common], help=fn.help)
            for flags, kwargs in fn.arguments:
                sub.add_argument(*flags, **kwargs)
        return parser

    def resolve(self, argv=None):
        args = self.parser.parse_args(argv)
        params = {
            key: value for key, value in vars(args).items()
            if key not in ('command', 'model', 'out', 'format', 'tol', 'log_level')
        }
        model = load_spec(args.model) if args.model else None
        config = RunConfig(
            command=args.command,
            model=model,
            params=params,
            output=args.out,
            format=args.format,
            tolerances=dict(args.tol),
        )
        return config, COMMANDS[args.command], args.log_level
