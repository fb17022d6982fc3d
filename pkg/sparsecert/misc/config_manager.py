import json
import logging
import os
from dotenv.main import load_dotenv

from sparsecert.misc.exceptions import ConfigError


class ConfigManager:
    """
    The config manager resolves settings from explicit overrides, environment variables, a JSON config file and
    default variables, in that order. It can therefore be used for local experiments as well as in batch jobs
    where everything is handed in through the environment.
    """

    def __init__(self, default_variables: dict = None, env_file: str = None, config_file: str = None,
                 env_prefix: str = "SPARSE_CERT_"):
        """

        :param default_variables: fallback values
        :param env_file: optional .env file that is loaded into the environment
        :param config_file: optional JSON file with a flat object of settings
        :param env_prefix: prefix of the environment variables, the key is upper-cased and appended
        """
        if default_variables is None:
            default_variables = {}
        self.default_variables = default_variables
        self.env_prefix = env_prefix
        self.variables = {}
        self.file_variables = {}
        if env_file is not None:
            if os.path.isfile(env_file):
                load_dotenv(env_file)
            else:
                logging.error("env file {} is not found".format(env_file))
        if config_file is not None:
            self.file_variables = self._read_config_file(config_file)

    @staticmethod
    def _read_config_file(config_file: str) -> dict:
        if not os.path.isfile(config_file):
            raise ConfigError("config file {} is not found".format(config_file))
        try:
            with open(config_file) as f:
                content = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError("config file {} is not valid JSON: {}".format(config_file, e))
        if not isinstance(content, dict):
            raise ConfigError("config file {} must contain a JSON object".format(config_file))
        return content

    def env_key(self, key: str) -> str:
        return "{}{}".format(self.env_prefix, key.upper())

    def has_value(self, key: str) -> bool:
        try:
            self.get_value(key)
        except KeyError:
            return False
        return True

    def get_value(self, key: str):
        if key in self.variables:
            return self.variables[key]
        elif self.env_key(key) in os.environ:
            return os.environ[self.env_key(key)]
        elif key in self.file_variables:
            return self.file_variables[key]
        elif key in self.default_variables:
            return self.default_variables[key]
        else:
            raise KeyError("Key {} not present!".format(key))

    def get_int(self, key: str) -> int:
        return self._convert(key, int)

    def get_float(self, key: str) -> float:
        return self._convert(key, float)

    def get_bool(self, key: str) -> bool:
        value = self.get_value(key)
        if isinstance(value, bool):
            return value
        if str(value).lower() in ("1", "true", "yes", "on"):
            return True
        if str(value).lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError("value {!r} of {} is not a boolean".format(value, key))

    def _convert(self, key: str, kind):
        value = self.get_value(key)
        try:
            if kind is int and isinstance(value, float) and not value.is_integer():
                raise ValueError("non-integral float")
            return kind(value)
        except (TypeError, ValueError):
            raise ConfigError("value {!r} of {} is not a valid {}".format(value, key, kind.__name__))

    def override_value(self, key: str, value):
        self.variables[key] = value

    def resolved(self) -> dict:
        """
        all known keys with their resolved values, used to echo the configuration into reports

        :return:
        """
        keys = set(self.default_variables) | set(self.file_variables) | set(self.variables)
        return {key: self.get_value(key) for key in sorted(keys)}
