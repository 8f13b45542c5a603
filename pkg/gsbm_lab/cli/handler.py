import contextlib
import json
import logging
import sys

from gsbm_lab import conf
from gsbm_lab.cli import commands  # noqa: F401 registers the subcommands
from gsbm_lab.cli.resolver import Resolver
from gsbm_lab.exceptions import ConfigError, GSBMError, VerificationFailure
from gsbm_lab.report import TIMESTAMP_KEY, dumps, timestamp

logger = logging.getLogger('gsbm_lab')

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


@contextlib.contextmanager
def opened(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, 'w', newline='') as fp:
            yield fp


def error_exit(ex):
    data = {'error': type(ex).__name__, 'message': str(ex), 'exit_code': ex.exit_code}
    if getattr(ex, 'link', None):
        data['link'] = ex.link
    sys.stderr.write(json.dumps(data) + '\n')
    return ex.exit_code


def handle(config, fn):
    """Run one command under its tolerances and write its output."""
    with conf.override(**config.tolerances):
        outcome = fn(config)
        resolved = dict(config.as_dict(), tolerances=conf.as_dict())
    if config.format == 'csv':
        if outcome.csv is None:
            raise ConfigError('%s has no tabular output; use --format json' % config.command)
        with opened(config.output) as fp:
            outcome.csv(fp)
    else:
        with opened(config.output) as fp:
            fp.write(dumps({'config': resolved, TIMESTAMP_KEY: timestamp(), **outcome.payload}))
    if not outcome.passed:
        violated = outcome.payload.get('violated') or ['concentration']
        raise VerificationFailure('%s failed: %s' % (config.command, ', '.join(violated)), link=violated[0])


def main(argv=None):
    try:
        config, fn, log_level = Resolver().resolve(argv)
    except GSBMError as ex:
        return error_exit(ex)
    logging.basicConfig(level=log_level, format=LOG_FORMAT, stream=sys.stderr)
    try:
        handle(config, fn)
    except GSBMError as ex:
        logger.debug('%s failed', config.command, exc_info=True)
        return error_exit(ex)
    return 0
