"""Hot reduction kernels with numba acceleration and a pure-numpy fallback.

The Monte Carlo validators and the scenario engine spend almost all of their
time reducing (trials x n_s) Gaussian sample blocks to per-trial statistics.
Those reductions live here in two interchangeable implementations:

* numba ``@njit`` kernels (default when numba imports cleanly), and
* vectorized numpy equivalents.

Set ``PHYNDN_NO_NUMBA=1`` in the environment to force the numpy path.  Both
paths consume the same numpy ``Generator`` draws, so results are bit-identical
regardless of backend; the flag only changes speed.  ``benchmarks/bench_kernels.py``
times the two side by side.
"""

from __future__ import annotations

import os

import numpy as np

_env_off = os.environ.get("PHYNDN_NO_NUMBA", "") not in ("", "0")

if not _env_off:
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USING_NUMBA = False
else:
    USING_NUMBA = False


def _row_mean_ss_numpy(y):
    means = y.mean(axis=1)
    ss = ((y - means[:, None]) ** 2).sum(axis=1)
    return means, ss


def _glrt_from_rows_numpy(y):
    n_s = y.shape[1]
    s = y.sum(axis=1)
    ss = ((y - (s / n_s)[:, None]) ** 2).sum(axis=1)
    out = np.empty(y.shape[0])
    zero_var = ss == 0.0
    ok = ~zero_var
    out[ok] = (n_s - 1) * s[ok] ** 2 / (n_s * ss[ok])
    out[zero_var] = np.where(s[zero_var] == 0.0, 0.0, np.inf)
    return out


if USING_NUMBA:

    @njit(cache=True)
    def _row_mean_ss_njit(y):
        rows, n_s = y.shape
        means = np.empty(rows)
        ss = np.empty(rows)
        for i in range(rows):
            acc = 0.0
            for k in range(n_s):
                acc += y[i, k]
            m = acc / n_s
            acc2 = 0.0
            for k in range(n_s):
                d = y[i, k] - m
                acc2 += d * d
            means[i] = m
            ss[i] = acc2
        return means, ss

    @njit(cache=True)
    def _glrt_from_rows_njit(y):
        rows, n_s = y.shape
        out = np.empty(rows)
        for i in range(rows):
            s = 0.0
            for k in range(n_s):
                s += y[i, k]
            m = s / n_s
            ssq = 0.0
            for k in range(n_s):
                d = y[i, k] - m
                ssq += d * d
            if ssq == 0.0:
                out[i] = 0.0 if s == 0.0 else np.inf
            else:
                out[i] = (n_s - 1) * s * s / (n_s * ssq)
        return out

    row_mean_ss = _row_mean_ss_njit
    glrt_from_rows = _glrt_from_rows_njit
else:
    row_mean_ss = _row_mean_ss_numpy
    glrt_from_rows = _glrt_from_rows_numpy

# Chunk size in samples for the Monte Carlo drivers below; bounds peak memory
# to ~80 MB of float64 regardless of trial count.
_CHUNK_SAMPLES = 10_000_000


def mc_mean_stats(rng, trials, n_s, mu, sigma):
    """Sample means of ``trials`` rows of ``n_s`` i.i.d. N(mu, sigma^2) draws."""
    out = np.empty(trials)
    rows_per_chunk = max(1, _CHUNK_SAMPLES // n_s)
    done = 0
    while done < trials:
        n = min(rows_per_chunk, trials - done)
        y = rng.normal(mu, sigma, size=(n, n_s))
        means, _ = row_mean_ss(y)
        out[done : done + n] = means
        done += n
    return out


def mc_glrt_stats(rng, trials, n_s, mu, sigma):
    """Variance-ratio statistics of ``trials`` rows of N(mu, sigma^2) draws."""
    out = np.empty(trials)
    rows_per_chunk = max(1, _CHUNK_SAMPLES // n_s)
    done = 0
    while done < trials:
        n = min(rows_per_chunk, trials - done)
        y = rng.normal(mu, sigma, size=(n, n_s))
        out[done : done + n] = glrt_from_rows(y)
        done += n
    return out


def mc_round_stats(rng, mus, sigmas, n_s):
    """Per-round (mean, centered sum of squares) for heterogeneous rounds.

    Round ``i`` draws ``n_s`` samples from N(mus[i], sigmas[i]^2).  Draws are
    consumed in round order so results are reproducible for a fixed rng state.
    """
    mus = np.asarray(mus, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    rounds = mus.shape[0]
    means = np.empty(rounds)
    ss = np.empty(rounds)
    rows_per_chunk = max(1, _CHUNK_SAMPLES // n_s)
    done = 0
    while done < rounds:
        n = min(rows_per_chunk, rounds - done)
        z = rng.standard_normal(size=(n, n_s))
        y = mus[done : done + n, None] + sigmas[done : done + n, None] * z
        m, s = row_mean_ss(y)
        means[done : done + n] = m
        ss[done : done + n] = s
        done += n
    return means, ss
