"""
Independent scalar reimplementation of the metric, proposal, acceptance and
transition kernel, written with explicit loops over coordinates and states.
Used only to cross-check the vectorized library code.
"""
import itertools
import math

import numpy as np


def metric(H, y, sigma2, x, tau=1.0):
    total = 0.0
    for m in range(len(y)):
        r = y[m] - sum(H[m][n] * x[n] for n in range(len(x)))
        total += r * r
    return -total / (tau * sigma2)


def gradient(H, y, sigma2, x, tau=1.0):
    residual = [y[m] - sum(H[m][n] * x[n] for n in range(len(x))) for m in range(len(y))]
    return [2.0 / (tau * sigma2) * sum(H[m][n] * residual[m] for m in range(len(y))) for n in range(len(x))]


def preconditioner(H, gamma):
    H = np.asarray(H, dtype=float)
    return np.linalg.inv(H.T @ H + gamma * np.eye(H.shape[1]))


def effective(grad, mode, alpha, beta=None, m=None):
    if mode == "naive":
        return list(grad), alpha
    n = len(grad)
    return [sum(m[i][j] * grad[j] for j in range(n)) / beta for i in range(n)], alpha * beta


def proposal_rows(x, g, alpha, alphabet):
    rows = []
    for n in range(len(x)):
        scores = [0.5 * g[n] * (a - x[n]) - (a - x[n]) ** 2 / (2.0 * alpha) for a in alphabet]
        top = max(scores)
        weights = [math.exp(s - top) for s in scores]
        total = sum(weights)
        rows.append([w / total for w in weights])
    return rows


def proposal_prob(rows, target, alphabet):
    p = 1.0
    for n, value in enumerate(target):
        p *= rows[n][int(np.argmin([abs(value - a) for a in alphabet]))]
    return p


def acceptance(f_x, f_xp, q_fwd, q_rev):
    return min(1.0, math.exp(f_xp - f_x) * q_rev / q_fwd)


def states(alphabet, n):
    return [list(s) for s in itertools.product(list(alphabet), repeat=n)]


def posterior(H, y, sigma2, alphabet, tau=1.0):
    space = states(alphabet, len(H[0]))
    f = [metric(H, y, sigma2, s, tau) for s in space]
    top = max(f)
    w = [math.exp(v - top) for v in f]
    total = sum(w)
    return [v / total for v in w]


def transition_matrix(H, y, sigma2, alphabet, mode="naive", alpha=None, beta=None, gamma=None, tau=1.0, adjusted=True):
    """Dense DMALA kernel by explicit double loop over states."""
    space = states(alphabet, len(H[0]))
    m = preconditioner(H, gamma) if mode == "preconditioned" else None
    cache = []
    for s in space:
        g, a_eff = effective(gradient(H, y, sigma2, s, tau), mode, alpha, beta, m)
        cache.append((metric(H, y, sigma2, s, tau), proposal_rows(s, g, a_eff, alphabet)))
    size = len(space)
    p = [[0.0] * size for _ in range(size)]
    for i in range(size):
        f_i, rows_i = cache[i]
        for j in range(size):
            if i == j:
                continue
            f_j, rows_j = cache[j]
            q_fwd = proposal_prob(rows_i, space[j], alphabet)
            if adjusted:
                q_rev = proposal_prob(rows_j, space[i], alphabet)
                p[i][j] = q_fwd * acceptance(f_i, f_j, q_fwd, q_rev)
            else:
                p[i][j] = q_fwd
        p[i][i] = 1.0 - sum(p[i])
    return np.array(p)


def monte_carlo_llr(samples, bit_table, clip=30.0):
    """
    Plain Monte Carlo LLR: log of the ratio of sample counts carrying each bit
    value. Samples must be alphabet indices of shape (S, N).
    """
    samples = np.asarray(samples)
    bits = bit_table[samples].reshape(samples.shape[0], -1)
    plus = (bits > 0).sum(axis=0)
    minus = (bits < 0).sum(axis=0)
    with np.errstate(divide="ignore"):
        llr = np.log(plus) - np.log(minus)
    return np.clip(np.nan_to_num(llr, posinf=clip, neginf=-clip), -clip, clip)
