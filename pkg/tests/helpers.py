"""Independent oracles used by the test-suite.

These are deliberately naive transcriptions: pure Python loops over the
1-based index formulas, Laplace expansion for determinants, central
differences for gradients.  None of them call into gausswit's numerics.
"""

import itertools

import numpy as np


def random_cm(rng, sizes, scale=1.0):
    dim = 2 * sum(sizes)
    x = rng.standard_normal((dim, dim)) * scale
    return (x + x.T) / 2


def random_blocks(rng, sizes, normalize=False):
    alpha, beta = [], []
    for s in sizes:
        a, b = rng.standard_normal(s), rng.standard_normal(s)
        if normalize:
            r = np.sqrt(a @ a + b @ b)
            a, b = a / r, b / r
        alpha.append(a)
        beta.append(b)
    return alpha, beta


def brute_gamma(cm, sizes, alpha, beta):
    """Entry-by-entry transcription of the Gamma formulas, 1-based indices."""
    n = len(sizes)

    def m(i, j):  # 1-based access
        return float(cm[i - 1][j - 1])

    def off(k):  # 2 * (s_1 + ... + s_{k-1}) for 1-based party k
        return 2 * sum(sizes[: k - 1])

    g = [[0.0] * n for _ in range(n)]
    for k in range(1, n + 1):
        s = sizes[k - 1]
        al, be = alpha[k - 1], beta[k - 1]
        total = 0.0
        for mm in range(1, s + 1):
            for h in range(1, s + 1):
                total += al[mm - 1] * al[h - 1] * m(off(k) + 2 * mm - 1, off(k) + 2 * h - 1)
        for mm in range(1, s + 1):
            for h in range(1, s + 1):
                total += be[mm - 1] * be[h - 1] * m(off(k) + 2 * mm, off(k) + 2 * h)
        for i in range(1, s + 1):
            total -= al[i - 1] * be[i - 1]
        g[k - 1][k - 1] = total
    for c in range(1, n + 1):
        for d in range(1, n + 1):
            if c == d:
                continue
            total = 0.0
            for mm in range(1, sizes[c - 1] + 1):
                for h in range(1, sizes[d - 1] + 1):
                    total += (alpha[c - 1][mm - 1] * alpha[d - 1][h - 1]
                              * m(off(c) + 2 * mm - 1, off(d) + 2 * h - 1))
            for mm in range(1, sizes[c - 1] + 1):
                for h in range(1, sizes[d - 1] + 1):
                    total += (beta[c - 1][mm - 1] * beta[d - 1][h - 1]
                              * m(off(c) + 2 * mm, off(d) + 2 * h))
            g[c - 1][d - 1] = total
    return np.array(g)


def cofactor_det(g):
    """Laplace expansion along the first row."""
    g = [list(map(float, row)) for row in g]
    n = len(g)
    if n == 0:
        return 1.0
    if n == 1:
        return g[0][0]
    total = 0.0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in g[1:]]
        total += (-1) ** j * g[0][j] * cofactor_det(minor)
    return total


def central_difference(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def flatten_blocks(alpha, beta):
    return np.concatenate([np.concatenate([a, b]) for a, b in zip(alpha, beta)])


def unflatten_blocks(x, sizes):
    alpha, beta, at = [], [], 0
    for s in sizes:
        alpha.append(x[at:at + s])
        beta.append(x[at + s:at + 2 * s])
        at += 2 * s
    return alpha, beta


def all_subsets(items):
    for r in range(1, len(items) + 1):
        yield from itertools.combinations(items, r)


def physical_party_cm(rng, s, max_squeeze=0.8):
    """Random valid ``s``-mode covariance matrix (vacuum = identity), interleaved.

    Thermal occupations and single-mode squeezing followed by a random
    passive (orthogonal symplectic) mixing of the modes.
    """
    d = rng.uniform(1.0, 3.0, size=s)
    r = rng.uniform(-max_squeeze, max_squeeze, size=s)
    m0 = np.diag(np.concatenate([d * np.exp(-2 * r), d * np.exp(2 * r)]))
    z = rng.standard_normal((s, s)) + 1j * rng.standard_normal((s, s))
    u, _ = np.linalg.qr(z)
    o = np.block([[u.real, -u.imag], [u.imag, u.real]])
    m = o @ m0 @ o.T
    order = np.ravel(np.column_stack([np.arange(s), s + np.arange(s)]))
    return m[np.ix_(order, order)]


def block_diag(blocks):
    dim = sum(len(b) for b in blocks)
    out = np.zeros((dim, dim))
    i = 0
    for b in blocks:
        out[i:i + len(b), i:i + len(b)] = b
        i += len(b)
    return out
