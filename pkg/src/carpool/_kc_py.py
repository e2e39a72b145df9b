"""Pure-Python Kelso-Crawford kernel on integer-scaled values.

Mirrors ``_kc.pyx`` exactly; used when the compiled module is missing,
when ``CARPOOL_PURE_PYTHON`` is set, or when values could overflow int64.
"""
from __future__ import annotations


def demand(l, eta, theta, owner, util, eps, n_riders, cap):
    """Outsiders that route ``l`` demands at current utilities, or [].

    Held riders are weighed at their value, outsiders at value minus
    (utility + eps).  The best top-k set (k <= cap) is compared against
    the best set built from held riders alone; only a strict improvement
    yields a non-empty demand.
    """
    row = eta[l]
    th = theta[l]
    items = []
    for m in range(n_riders):
        if owner[m] == l:
            items.append((-row[m], 0, m))
        else:
            items.append((-(row[m] - util[m] - eps), 1, m))
    items.sort()
    best, best_k, prefix = 0, 0, 0
    for k in range(1, min(cap, n_riders) + 1):
        prefix -= items[k - 1][0]
        val = prefix - th[k]
        if val > best:
            best, best_k = val, k
    if best_k == 0:
        return []
    held_best, prefix, k = 0, 0, 0
    for neg, outsider, _ in items:
        if outsider:
            continue
        k += 1
        if k > cap:
            break
        prefix -= neg
        val = prefix - th[k]
        if val > held_best:
            held_best = val
    if best <= held_best:
        return []
    return [m for _, outsider, m in items[:best_k] if outsider]


def run_auction(eta, theta, eps, max_iter):
    """Run the ascending auction.

    eta[l][m]: integer value of rider m on auxiliary route l.
    theta[l][k]: integer cost of a size-k group on route l (theta[l][0] == 0).
    Returns (owner, utilities, iterations); iterations is -1 when the
    guard ``max_iter`` was hit.
    """
    n_aux = len(eta)
    n_riders = len(eta[0]) if n_aux else 0
    cap = len(theta[0]) - 1 if n_aux else 0
    owner = [-1] * n_riders
    util = [0] * n_riders
    iterations = 0
    while True:
        moved = False
        for l in range(n_aux):
            J = demand(l, eta, theta, owner, util, eps, n_riders, cap)
            if J:
                for m in J:
                    owner[m] = l
                    util[m] += eps
                iterations += 1
                moved = True
                break
        if not moved:
            return owner, util, iterations
        if iterations >= max_iter:
            return owner, util, -1
