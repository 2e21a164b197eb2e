import logging
import os
from typing import Dict, Optional

from dotenv import load_dotenv

from modules.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULTS = {
    'tol_struct': 1e-9,
    'tol_nr': 1e-8,
    'tol_s': 1e-9,
    'tol_e': 1e-6,
    'tol_xcheck': 1e-8,
    'eps_sing': 1e-3,
    'samples': 256,
    'seed': 7,
    'admissibility_grid': 32,
    'workers': 1,
}

INT_KEYS = ('samples', 'seed', 'admissibility_grid', 'workers')
ENV_PREFIX = 'FINSLER_'

_loaded = False


def init_settings() -> bool:
    """Load a .env file once; later calls are no-ops."""
    global _loaded
    if not _loaded:
        found = load_dotenv()
        if found:
            logger.debug("Loaded settings overrides from .env")
        _loaded = True
    return _loaded


def _coerce(key: str, value) -> float:
    if key not in DEFAULTS:
        raise ConfigError(f"Unknown setting '{key}'; expected one of {', '.join(sorted(DEFAULTS))}")
    try:
        if key in INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            coerced = int(float(value)) if isinstance(value, str) else int(value)
        else:
            coerced = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"Setting '{key}' has invalid value {value!r}")

    if key == 'seed':
        if coerced < 0:
            raise ConfigError(f"Setting 'seed' must be non-negative, got {coerced}")
    elif coerced <= 0:
        raise ConfigError(f"Setting '{key}' must be positive, got {coerced}")
    return coerced


def env_overrides() -> Dict:
    init_settings()
    overrides = {}
    for key in DEFAULTS:
        raw = os.environ.get(ENV_PREFIX + key.upper())
        if raw is not None and raw.strip():
            overrides[key] = _coerce(key, raw.strip())
    return overrides


def resolve_settings(file_overrides: Optional[Dict] = None, cli_overrides: Optional[Dict] = None) -> Dict:
    """
    defaults -> environment (FINSLER_<NAME>, .env) -> [tolerances] of the
    input file -> command-line flags. None values in a layer are skipped.
    """
    settings = dict(DEFAULTS)
    settings.update(env_overrides())
    for layer in (file_overrides or {}, cli_overrides or {}):
        for key, value in layer.items():
            if value is None:
                continue
            settings[key] = _coerce(key, value)
    return settings


def merged(settings: Optional[Dict] = None) -> Dict:
    """Fill missing keys from DEFAULTS without touching the environment."""
    out = dict(DEFAULTS)
    for key, value in (settings or {}).items():
        out[key] = _coerce(key, value)
    return out
