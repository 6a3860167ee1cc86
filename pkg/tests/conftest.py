import os

import pytest

from quadtwist import cache as cachemod
from quadtwist.arith import BumpFunction
from quadtwist.curve import load_curve
from quadtwist.lvalue import central_value_map, truncation_length
from quadtwist.twists import FamilyParams, enum_family

# the expensive artifacts (point counts, central values) persist here so
# repeat runs are cheap; safe to delete at any time
CACHE_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), ".cache", "quadtwist")

# big enough for the X = 4e5 first-moment run at tol 1e-3:
# T = Q(|d|=1e6) * (log 1e3 + log(Q+2) + 4) ~ 12.72e6
NMAX_BIG = 12_800_000
NMAX_SMALL = 700_000

MOMENT_TOL = 1e-3


@pytest.fixture(scope="session")
def cfg():
    return load_curve("11a1")


@pytest.fixture(scope="session")
def phi():
    return BumpFunction()


@pytest.fixture(scope="session")
def table_small(cfg):
    return cachemod.ensure_coefficients(cfg, NMAX_SMALL, CACHE_DIR)


@pytest.fixture(scope="session")
def table_big(cfg):
    # reuses/extends the same trace cache file the small fixture made
    return cachemod.ensure_coefficients(cfg, NMAX_BIG, CACHE_DIR)


def family_at(cfg, X, a=5, sign=1, W=64):
    params = FamilyParams(a=a, sign=sign, X=float(X), W=W, z=2.0, D=4.0, s=2.0, M=1)
    return params, enum_family(cfg, params)


@pytest.fixture(scope="session")
def family_1e4(cfg):
    return family_at(cfg, 1e4)


@pytest.fixture(scope="session")
def family_1e6(cfg):
    return family_at(cfg, 1e6)


def lvalue_cache(cfg, tol):
    return cachemod.LValueCache(CACHE_DIR, cfg.label, tol)


def lvalues_for(cfg, table, family, tol):
    cache = lvalue_cache(cfg, tol)
    try:
        return central_value_map(cfg, table, [t.d for t in family], tol, cache)
    finally:
        cache.close()


def checked_truncation(cfg, X, tol):
    return truncation_length(cfg, int(5 * X / 2), tol)
