COMMANDS = {}


def arg(*flags, **kwargs):
    return flags, kwargs


def command(name, *arguments, help=None, tabular=False):
    """Register a ``cmd_*`` function as a subcommand with its own flags."""
    def register(fn):
        fn.command = name
        fn.arguments = arguments
        fn.help = help or (fn.__doc__ or '').strip().splitlines()[0]
        fn.tabular = tabular
        COMMANDS[name] = fn
        return fn
    return register
