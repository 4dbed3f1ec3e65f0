"""
Effective run configuration.
Layers, lowest to highest: config.py defaults, JSON config file,
GAPSCOPE_* environment variables, command-line flags.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from arithmetic import Frequency, continued_fraction_expand
from config import ALPHA_PRESETS, GAPSCOPE_DEFAULTS, MAX_BUTTERFLY_Q, MAX_LABEL
from errors import ConfigError, GapscopeError

logger = logging.getLogger(__name__)

ENV_PREFIX = 'GAPSCOPE_'

FIELD_TYPES = {
    'lambda': float,
    'alpha': str,
    'E': float,
    'epsilon': float,
    'grid': float,
    'n': int,
    'iters': int,
    'scan_iters': int,
    'phases': int,
    'seed': int,
    'kmax': int,
    'max_q': int,
    'norm': float,
    'qnext': int,
    'workers': int,
    'output': str,
    'cache_dir': str,
}

# fields that never change results and stay out of cache keys
NON_SEMANTIC = ('output', 'cache_dir', 'workers')


def _flag(name: str) -> str:
    return '--' + name.replace('_', '-')


def parse_alpha(spec: str) -> Frequency:
    """
    Parse a frequency: a preset name, a reduced fraction 'p/q',
    a quotient list '[a1, a2, ...]' or a decimal value.
    """
    text = str(spec).strip()
    try:
        if text in ALPHA_PRESETS:
            return Frequency.preset(text)
        if '/' in text:
            p, q = (int(part) for part in text.split('/'))
            return Frequency.rational_surrogate(p, q)
        if text.startswith('['):
            return Frequency.from_quotients(json.loads(text), name=text.replace(' ', ''))
        return continued_fraction_expand(float(text), max_terms=40)
    except (ValueError, GapscopeError) as e:
        raise ConfigError(f"cannot read alpha '{text}': {e}", flag='--alpha') from e


def _coerce(name: str, value: Any, source: str) -> Any:
    kind = FIELD_TYPES[name]
    try:
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise ValueError(f"{value} is not an integer")
        return kind(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name} from {source}: {e}", flag=_flag(name)) from e


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}", flag='--config') from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object", flag='--config')
    unknown = sorted(set(data) - set(FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown keys in {path}: {', '.join(unknown)}", flag='--config')
    return data


def environment_values(env: Mapping[str, str]) -> Dict[str, str]:
    return {name: env[ENV_PREFIX + name.upper()] for name in FIELD_TYPES if ENV_PREFIX + name.upper() in env}


@dataclass(frozen=True)
class Override:
    """A value replaced by a higher-precedence source."""

    name: str
    value: Any
    source: str
    replaced_value: Any
    replaced_source: str


@dataclass(frozen=True)
class RunConfig:
    """The resolved configuration for one subcommand run."""

    subcommand: str
    values: Dict[str, Any]
    sources: Dict[str, str]
    overrides: Tuple[Override, ...] = ()
    use_cache: bool = True
    config_path: Optional[str] = None
    alpha: Frequency = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'alpha', parse_alpha(self.values['alpha']))

    def __getitem__(self, name: str) -> Any:
        return self.values[name]

    @property
    def lam(self) -> float:
        return self.values['lambda']

    def canonical(self) -> Dict[str, Any]:
        """Result-affecting values, used for cache keys and artifact headers."""
        data = {k: v for k, v in self.values.items() if k not in NON_SEMANTIC}
        data['alpha_value'] = self.alpha.value
        return data

    def banner_lines(self) -> List[str]:
        lines = [f"subcommand: {self.subcommand}"]
        if self.config_path:
            lines.append(f"config file: {self.config_path}")
        for name in FIELD_TYPES:
            source = self.sources[name]
            suffix = '' if source == 'default' else f"  ({source})"
            lines.append(f"  {name:<10}= {self.values[name]}{suffix}")
        for o in self.overrides:
            lines.append(f"  ! {o.name}: {o.source} value {o.value!r} overrides "
                         f"{o.replaced_source} value {o.replaced_value!r}")
        if not self.use_cache:
            lines.append("  cache disabled (--no-cache)")
        return lines


def _validate(values: Dict[str, Any]):
    checks = [
        ('lambda', values['lambda'] > 0, "must be > 0"),
        ('grid', values['grid'] > 0, "must be > 0"),
        ('n', values['n'] >= 100, "must be at least 100"),
        ('iters', values['iters'] >= 1000, "must be at least 1000"),
        ('scan_iters', values['scan_iters'] >= 100, "must be at least 100"),
        ('phases', values['phases'] >= 1, "must be at least 1"),
        ('kmax', 1 <= values['kmax'] <= MAX_LABEL, f"must lie in 1..{MAX_LABEL}"),
        ('max_q', 1 <= values['max_q'] <= MAX_BUTTERFLY_Q, f"must lie in 1..{MAX_BUTTERFLY_Q}"),
        ('norm', values['norm'] > 0, "must be > 0"),
        ('qnext', values['qnext'] >= 1, "must be at least 1"),
        ('workers', values['workers'] >= 1, "must be at least 1"),
        ('seed', values['seed'] >= 0, "must be non-negative"),
    ]
    for name, ok, message in checks:
        if not ok:
            raise ConfigError(f"{_flag(name)} {message}, got {values[name]}", flag=_flag(name))


def build_run_config(subcommand: str, flags: Mapping[str, Any], env: Optional[Mapping[str, str]] = None,
                     config_path: Optional[str] = None, use_cache: bool = True) -> RunConfig:
    """
    Resolve the effective configuration.

    Args:
        subcommand: subcommand name
        flags: values given on the command line (None entries are ignored)
        env: environment mapping, defaults to os.environ
        config_path: JSON file path; falls back to GAPSCOPE_CONFIG

    Returns:
        RunConfig with per-field sources and the list of overridden values
    """
    env = os.environ if env is None else env
    config_path = config_path or env.get(ENV_PREFIX + 'CONFIG')
    layers = [
        ('file', load_config_file(config_path)),
        ('env', environment_values(env)),
        ('flag', {k: v for k, v in flags.items() if v is not None and k in FIELD_TYPES}),
    ]
    values = dict(GAPSCOPE_DEFAULTS)
    sources = {name: 'default' for name in values}
    overrides: List[Override] = []
    for source, layer in layers:
        for name, raw in layer.items():
            value = _coerce(name, raw, source)
            if sources[name] != 'default' and values[name] != value:
                overrides.append(Override(name, value, source, values[name], sources[name]))
            values[name] = value
            sources[name] = source
    _validate(values)
    for o in overrides:
        logger.debug("%s: %s overrides %s", o.name, o.source, o.replaced_source)
    return RunConfig(subcommand, values, sources, tuple(overrides), use_cache, config_path)
