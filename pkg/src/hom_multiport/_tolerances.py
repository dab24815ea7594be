"""Numerical floors shared by every module.

Each value can be overridden through an environment variable read once at
import time, e.g. ``HOM_MULTIPORT_EPS_ZERO=1e-14``.
"""

import os


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValueError(f"{name}={raw!r} is not a float") from exc
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


# terms with |amplitude| below this are dropped
EPS_ZERO = _env_float("HOM_MULTIPORT_EPS_ZERO", 1e-12)
# norm conservation / comparison tolerance
EPS_NORM = _env_float("HOM_MULTIPORT_EPS_NORM", 1e-12)
# ||M^dagger M - I||_max
EPS_UNITARY = _env_float("HOM_MULTIPORT_EPS_UNITARY", 1e-12)
# residual interior norm above which a run is reported as non-terminating
EPS_RESIDUAL = _env_float("HOM_MULTIPORT_EPS_RESIDUAL", 1e-9)
