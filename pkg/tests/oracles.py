"""Brute-force reference computations, kept independent of the package code."""

import math


def topsis_bruteforce(rows, kinds, weights, prenormalized=False):
    """Plain-loop TOPSIS. Returns (s_plus, s_minus, rc, ranks) as lists."""
    m, n = len(rows), len(rows[0])
    if prenormalized:
        r = [list(row) for row in rows]
    else:
        r = [[0.0] * n for _ in range(m)]
        for j in range(n):
            norm = math.sqrt(sum(rows[i][j] ** 2 for i in range(m)))
            for i in range(m):
                r[i][j] = rows[i][j] / norm if norm > 0 else 0.0
    v = [[r[i][j] * weights[j] for j in range(n)] for i in range(m)]
    best, worst = [], []
    for j in range(n):
        col = [v[i][j] for i in range(m)]
        if kinds[j] == "benefit":
            best.append(max(col))
            worst.append(min(col))
        else:
            best.append(min(col))
            worst.append(max(col))
    s_plus, s_minus, rc = [], [], []
    for i in range(m):
        dp = math.sqrt(sum((v[i][j] - best[j]) ** 2 for j in range(n)))
        dm = math.sqrt(sum((v[i][j] - worst[j]) ** 2 for j in range(n)))
        s_plus.append(dp)
        s_minus.append(dm)
        rc.append(0.5 if dp + dm < 1e-12 else dm / (dp + dm))
    # rank = 1 + number of alternatives strictly better, or equal and earlier
    ranks = []
    for i in range(m):
        ranks.append(1 + sum(1 for a in range(m) if rc[a] > rc[i] or (rc[a] == rc[i] and a < i)))
    return s_plus, s_minus, rc, ranks


def ahp_by_hand(matrix):
    n = len(matrix)
    col_sums = [sum(matrix[i][j] for i in range(n)) for j in range(n)]
    return [sum(matrix[i][j] / col_sums[j] for j in range(n)) / n for i in range(n)]


def time_to_leave(dx, dy, dvx, dvy, radius, horizon, dt=1e-4):
    """Step forward until the separation first exceeds ``radius``."""
    t = 0.0
    while t < horizon:
        if math.hypot(dx + dvx * t, dy + dvy * t) > radius:
            return t
        t += dt
    return horizon
