class SparseCertError(Exception):
    """base class of all errors raised by sparsecert"""


class DomainError(SparseCertError, ValueError):
    """a numeric argument lies outside the domain of an operation"""


class PreconditionError(SparseCertError, ValueError):
    """a mathematical precondition of an operation does not hold"""


class ConfigError(SparseCertError):
    """a configuration value is missing or malformed"""


class DataError(SparseCertError):
    """a data file or dataset violates its format or contract"""
