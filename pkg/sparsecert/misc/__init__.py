from sparsecert.misc.config_manager import ConfigManager
from sparsecert.misc.exceptions import SparseCertError, DomainError, PreconditionError, ConfigError, DataError
