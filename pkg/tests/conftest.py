"""Shared instances and seeded parameter draws for the test suite."""

import numpy as np
import pytest

from opensirs import ModelParams, bistable_special_instance, perturb_special_case

# Invariant-axes bistable instance: thresholds (1.4, 1.0, -0.1, -0.05),
# boundary sinks (0.35, 0) and (0, 0.5), interior saddle (0.2, 0.2).
SPECIAL_BISTABLE_PARAMS = ModelParams(
    b=0.0, d=0.0, eps1=2.0, eps2=4.0, lam=1.0, alpha=1.0,
    gamma=0.0, beta1=0.0, beta2=2.6,
)

# Generic strictly positive instance, unique interior sink.
GENERIC_A_PARAMS = ModelParams(
    b=0.3, d=0.2, eps1=1.0, eps2=2.0, lam=0.7, alpha=0.5,
    gamma=0.4, beta1=0.1, beta2=0.2,
)


def log_uniform(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def draw_positive_params(rng):
    """One strictly positive parameter set, rates O(0.05..3)."""
    return ModelParams(
        b=log_uniform(rng, 0.05, 2.0),
        d=log_uniform(rng, 0.05, 1.0),
        eps1=log_uniform(rng, 0.05, 3.0),
        eps2=log_uniform(rng, 0.05, 3.0),
        lam=log_uniform(rng, 0.05, 3.0),
        alpha=log_uniform(rng, 0.05, 3.0),
        gamma=log_uniform(rng, 0.05, 3.0),
        beta1=log_uniform(rng, 0.05, 1.5),
        beta2=log_uniform(rng, 0.05, 1.5),
    )


def draw_origin_only_special(rng):
    """Special-case draw with both origin thresholds negative.

    alpha and beta margins keep the out-of-region axis rest points at least
    0.1 away from the origin so small excision disks stay clean.
    """
    eps1 = log_uniform(rng, 0.5, 2.5)
    eps2 = eps1 + log_uniform(rng, 0.5, 2.5)
    alpha = (eps2 - eps1) + log_uniform(rng, 0.3, 2.0)
    beta = eps2 + log_uniform(rng, 0.3, 2.0)
    return ModelParams(
        b=0.0, d=0.0, eps1=eps1, eps2=eps2, lam=log_uniform(rng, 0.3, 2.0),
        alpha=alpha, gamma=0.0, beta1=0.0, beta2=beta,
    )


def draw_bistable_special(rng, max_tries=50):
    """Special-case draw in the two-sinks regime, via the constructor."""
    from opensirs import EmptyInterval

    for _ in range(max_tries):
        eps1 = log_uniform(rng, 0.5, 2.5)
        eps2 = eps1 + log_uniform(rng, 0.5, 2.5)
        lam = log_uniform(rng, 0.3, 2.0)
        frac = rng.uniform(0.2, 0.45)
        try:
            return bistable_special_instance(eps1, eps2, lam, ratio_fraction=frac)
        except EmptyInterval:
            continue
    raise RuntimeError("no bistable special draw in max_tries")


@pytest.fixture(scope="session")
def special_bistable():
    return SPECIAL_BISTABLE_PARAMS


@pytest.fixture(scope="session")
def generic_a():
    return GENERIC_A_PARAMS


@pytest.fixture(scope="session")
def perturbed_b():
    """Strictly positive two-sink instance from the canonical chain."""
    return perturb_special_case(bistable_special_instance(2.0, 4.0, 1.0), 1e-3)
