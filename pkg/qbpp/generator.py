"""
Benchmark instance generator.

Each instance is defined by (n, mu, delta, sigma). Item data (weights and
dissimilarities) depend only on (n, delta, sigma, seed, copy); mu only sets
the capacity W and the bin cost alpha, so instances of one mu-group share
their items.

Random streams: numpy `PCG64` seeded by `SeedSequence(seed,
spawn_key=(copy,))`. For the full benchmark, the seed of each
(n, delta, sigma) configuration is `config_seed(master_seed, n, delta,
sigma)`.

"""
import csv
import logging
import math
import os
from fractions import Fraction

import numpy as np

from .common import InputError, MINUS, PLUS, MIXED, SIGMAS, normalize_sigma
from .core import Instance, write_instance


logger = logging.getLogger(__name__)

WEIGHT_RANGE = (1, 50)

DISSIM_RANGES = {
    PLUS: (0, 100),
    MINUS: (-100, 0),
    MIXED: (-50, 50),
}

BENCHMARK_NS = (25, 30, 35, 40, 45)
BENCHMARK_MUS = (0.6, 1.0, 2.0)
BENCHMARK_DELTAS = (0.25, 0.5, 0.75)
BENCHMARK_SIGMAS = (MIXED, PLUS, MINUS)
BENCHMARK_COPIES = 5

MANIFEST_NAME = "manifest.csv"
MANIFEST_FIELDS = ("file", "n", "mu", "delta", "sigma", "copy", "group",
                   "W", "alpha", "seed")


class GeneratorConfig(object):

    def __init__(self, n, mu=1.0, delta=0.5, sigma=MIXED, seed=0,
                 copies=BENCHMARK_COPIES):
        self.n = int(n)
        self.mu = float(mu)
        self.delta = float(delta)
        self.sigma = normalize_sigma(sigma)
        self.seed = int(seed)
        self.copies = int(copies)

        if self.n < 1:
            raise InputError("n must be at least 1")
        if not 0 < self.delta <= 1:
            raise InputError("delta must lie in (0, 1]")
        if self.mu <= 0:
            raise InputError("mu must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise InputError("seed must be a 64-bit unsigned integer")


class DerivedParams(object):

    def __init__(self, total_weight, W, m, n_bar, d_bar, alpha):
        self.total_weight = total_weight
        self.W = W
        self.m = m
        self.n_bar = n_bar
        self.d_bar = d_bar
        self.alpha = alpha


def _exact(value):
    return Fraction(repr(float(value)))


def item_rng(seed, copy=0):
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(copy),))
    return np.random.Generator(np.random.PCG64(sequence))


def config_seed(master_seed, n, delta, sigma):
    """
    Seed of one (n, delta, sigma) configuration of the benchmark.

    """
    key = (int(n), int(round(float(delta) * 1000)),
           SIGMAS.index(normalize_sigma(sigma)))
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=key)
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def generate_items(n, delta, sigma, rng):
    """
    Draw weights from U{1..50} and, for each pair i < j in row-major order,
    a dissimilarity from the sigma range with probability delta.

    """
    sigma = normalize_sigma(sigma)
    low, high = WEIGHT_RANGE
    weights = rng.integers(low, high, size=n, endpoint=True)

    rows, cols = np.triu_indices(n, k=1)
    npairs = len(rows)
    present = rng.random(npairs) < delta
    d_low, d_high = DISSIM_RANGES[sigma]
    values = rng.integers(d_low, d_high, size=npairs, endpoint=True)
    values = np.where(present, values, 0)

    dissim = np.zeros((n, n), dtype=np.int64)
    dissim[rows, cols] = values
    dissim[cols, rows] = values

    return [int(w) for w in weights], dissim


def derive_capacity_and_cost(weights, dissim, n, mu):
    if not len(weights):
        raise InputError("weights must be non-empty")

    total = int(sum(weights))
    mu_exact = _exact(mu)
    W = max(1, math.floor(Fraction(total, 5) / mu_exact))
    m = -(-total // W)
    n_bar = Fraction(n, m)

    if n < 2:
        d_bar = Fraction(0)
    else:
        pair_sum = int(np.triu(np.asarray(dissim), k=1).sum())
        d_bar = n_bar * pair_sum / Fraction(n * (n - 1), 2)

    alpha = math.ceil(mu_exact * abs(d_bar))

    return DerivedParams(total, W, m, float(n_bar), float(d_bar), alpha)


def _build_instance(weights, dissim, mu, meta):
    n = len(weights)
    params = derive_capacity_and_cost(weights, dissim, n, mu)
    capacity = params.W
    clamped = 0
    if capacity < max(weights):
        capacity = max(weights)
        clamped = 1
        logger.debug("Capacity %d raised to heaviest item %d" %
                     (params.W, capacity))

    meta = dict(meta)
    meta["mu"] = float(mu)
    meta["clamped"] = clamped

    return Instance(weights, capacity, params.alpha, dissim, meta)


def group_id(n, delta, sigma, seed, copy):
    return "n%d-d%s-%s-%016x-c%d" % (n, repr(float(delta)),
                                     normalize_sigma(sigma), seed, copy)


def generate_instance(config, copy=0):
    rng = item_rng(config.seed, copy)
    weights, dissim = generate_items(config.n, config.delta, config.sigma,
                                     rng)
    meta = {
        "delta": config.delta,
        "sigma": config.sigma,
        "seed": config.seed,
        "copy": int(copy),
        "group": group_id(config.n, config.delta, config.sigma,
                          config.seed, copy),
    }
    return _build_instance(weights, dissim, config.mu, meta)


def generate_group(base, mus, seed=None, copy=0):
    """
    Instances sharing one item draw, one per value in `mus`.

    """
    mus = list(mus)
    if not mus:
        raise InputError("mus must be non-empty")
    seed = base.seed if seed is None else int(seed)

    rng = item_rng(seed, copy)
    weights, dissim = generate_items(base.n, base.delta, base.sigma, rng)
    meta = {
        "delta": base.delta,
        "sigma": base.sigma,
        "seed": seed,
        "copy": int(copy),
        "group": group_id(base.n, base.delta, base.sigma, seed, copy),
    }
    return [_build_instance(weights, dissim, mu, meta) for mu in mus]


def instance_filename(n, mu, delta, sigma, copy):
    return "qbpp_n%d_mu%s_d%s_%s_%d.qbpp" % (
        n, repr(float(mu)), repr(float(delta)), normalize_sigma(sigma), copy)


def generate_benchmark(out_dir, master_seed=42, ns=BENCHMARK_NS,
                       mus=BENCHMARK_MUS, deltas=BENCHMARK_DELTAS,
                       sigmas=BENCHMARK_SIGMAS, copies=BENCHMARK_COPIES):
    """
    Write the full (n, mu, delta, sigma) cross and a CSV manifest.

    Returns the manifest rows.

    """
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for n in ns:
        for delta in deltas:
            for sigma in sigmas:
                seed = config_seed(master_seed, n, delta, sigma)
                base = GeneratorConfig(n, 1.0, delta, sigma, seed, copies)
                for copy in range(copies):
                    group = generate_group(base, mus, seed, copy)
                    for mu, inst in zip(mus, group):
                        name = instance_filename(n, mu, delta, sigma, copy)
                        with open(os.path.join(out_dir, name), "w") as f:
                            f.write(write_instance(inst))
                        rows.append({
                            "file": name,
                            "n": n,
                            "mu": repr(float(mu)),
                            "delta": repr(float(delta)),
                            "sigma": base.sigma,
                            "copy": copy,
                            "group": inst.meta["group"],
                            "W": inst.capacity,
                            "alpha": inst.bin_cost,
                            "seed": seed,
                        })

    rows.sort(key=lambda r: r["file"])
    with open(os.path.join(out_dir, MANIFEST_NAME), "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=MANIFEST_FIELDS)
        writer.writeheader()
        writer.writerows(rows)

    logger.info("Generated %d instances in %s" % (len(rows), out_dir))
    return rows
