from __future__ import annotations

import os

from dotenv import load_dotenv

from ptqm.errors import DomainError

load_dotenv()

DEFAULT_RTOL = 1e-9
DEFAULT_TOL = 1e-8
DEFAULT_COND_CAP = 1e8
CLUSTER_TOL = 1e-7
ALPHA_FLOOR = 1e-6
RANK_TOL = 1e-10

SEED_ENV = "PTQM_SEED"


def default_seed() -> int:
    """Seed used whenever randomness is needed and none is given. Override with PTQM_SEED."""
    raw = os.getenv(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise DomainError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc
