"""Exception hierarchy shared by every stage.

The CLI maps each class onto a process exit code.
"""


class RegionScopeError(Exception):
    exit_code = 1


class ConfigError(RegionScopeError, ValueError):
    exit_code = 2


class DataError(RegionScopeError, ValueError):
    exit_code = 3


class NumericalError(RegionScopeError, ArithmeticError):
    exit_code = 4
