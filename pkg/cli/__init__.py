from cli.commands import COMMANDS, cmd_apply, cmd_check_phi, cmd_norm, cmd_rearrange, cmd_verify
from cli.config import ConfigError, RunConfig, dump_config, load_config

__all__ = [
    "COMMANDS",
    "ConfigError",
    "RunConfig",
    "cmd_apply",
    "cmd_check_phi",
    "cmd_norm",
    "cmd_rearrange",
    "cmd_verify",
    "dump_config",
    "load_config",
]
