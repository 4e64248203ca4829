"""Independent high-precision transcription of the statistic formulas.

Used only as a cross-check oracle: every statistic is recomputed here
directly from its defining expression with 40-digit arithmetic, sharing
no code with the package implementation.
"""

from mpmath import mp, mpf

mp.dps = 40

INF = mpf("inf")


def reference_value(name: str, counts, expected, probs) -> mpf:
    """Evaluate one statistic by its textbook formula.

    ``counts`` are the observed integers, ``expected`` the (float) expected
    counts, ``probs`` the null cell probabilities.  Returns an mpf, possibly
    infinite.
    """
    k = len(counts)
    O = [mpf(int(c)) for c in counts]
    E = [mpf(float(e)) for e in expected]
    p = [mpf(float(q)) for q in probs]
    n = sum(O)
    e_bar = sum(E) / k
    o_bar = sum(O) / k

    if name == "pearson":
        return sum((O[i] - E[i]) ** 2 / E[i] for i in range(k))
    if name == "neyman":
        if any(O[i] == 0 for i in range(k)):
            return INF
        return sum((O[i] - E[i]) ** 2 / O[i] for i in range(k))
    if name == "wilks":
        return 2 * sum(O[i] * mp.log(O[i] / E[i]) for i in range(k) if O[i] > 0)
    if name == "kullback":
        if any(O[i] == 0 for i in range(k)):
            return INF
        return 2 * sum(E[i] * mp.log(E[i] / O[i]) for i in range(k) if E[i] > 0)
    if name == "new_pearson":
        return sum((O[i] - E[i]) ** 2 / e_bar for i in range(k))
    if name == "new_neyman":
        return sum((O[i] - E[i]) ** 2 / o_bar for i in range(k))
    if name == "new_wilks":
        return 2 * sum(O[i] * mp.log(O[i] / e_bar) for i in range(k) if O[i] > 0)
    if name == "new_kullback":
        if any(O[i] == 0 for i in range(k)):
            return INF
        return 2 * sum(e_bar * mp.log(e_bar / O[i]) for i in range(k))
    if name == "nominal_ks":
        return sum(abs(O[i] - E[i]) for i in range(k)) / 2

    Z = []
    acc = mpf(0)
    for i in range(k):
        acc += O[i] - E[i]
        Z.append(acc)
    if name == "discrete_ks":
        return max(abs(z) for z in Z)
    if name == "discrete_cvm":
        return sum(Z[i] ** 2 * p[i] for i in range(k)) / n
    if name == "discrete_watson":
        z_bar = sum(Z[j] * p[j] for j in range(k))
        return sum((Z[i] - z_bar) ** 2 * p[i] for i in range(k)) / n
    if name == "discrete_ad":
        H = []
        acc = mpf(0)
        for i in range(k):
            acc += p[i]
            H.append(acc)
        total = mpf(0)
        for i in range(k - 1):
            if p[i] == 0:
                continue
            w = H[i] * (1 - H[i])
            if w <= 0:
                if Z[i] != 0:
                    return INF
                continue
            total += Z[i] ** 2 * p[i] / w
        return total / n
    raise ValueError(f"unknown statistic {name!r}")
