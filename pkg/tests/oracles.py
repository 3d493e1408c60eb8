"""Slow, independent reference implementations used as test oracles."""

import itertools
import math

import numpy as np


def brute_kde(ref, queries, h):
    out = []
    norm = (2.0 * math.pi * h * h) ** -1.5
    for q in queries:
        total = 0.0
        for r in ref:
            sq = sum((float(a) - float(b)) ** 2 for a, b in zip(q, r))
            total += math.exp(-sq / (2.0 * h * h))
        out.append(norm * total / len(ref))
    return np.array(out)


def naive_hybrid(points, densities, m, alpha, epsilon, candidates):
    """Greedy hybrid selection by full re-scan; ``candidates`` is the pool (point indices)."""
    candidates = sorted(int(c) for c in candidates)
    chosen = []
    while len(chosen) < m and len(chosen) < len(candidates):
        best, best_score = None, -math.inf
        for c in candidates:
            if c in chosen:
                continue
            factor = (1.0 / (densities[c] + epsilon)) ** alpha
            if chosen:
                d = min(math.dist(points[c], points[l]) for l in chosen)
                score = d * factor
            else:
                score = factor
            if score > best_score:
                best, best_score = c, score
        chosen.append(best)
    return chosen


def maxmin(points, m, start=0):
    chosen = [start]
    while len(chosen) < m:
        best, best_d = None, -1.0
        for i in range(len(points)):
            if i in chosen:
                continue
            d = min(math.dist(points[i], points[j]) for j in chosen)
            if d > best_d:
                best, best_d = i, d
        chosen.append(best)
    return chosen


def brute_knn(witness_pts, landmark_pts, k):
    out = []
    for w in witness_pts:
        ds = sorted((math.dist(w, l), j) for j, l in enumerate(landmark_pts))
        out.append([(j, d) for d, j in ds[:k]])
    return out


def brute_witness(points, landmark_idx, k, max_dim):
    """dict simplex -> value, straight from the definition."""
    lm = list(landmark_idx)
    lset = set(lm)
    values = {(i,): 0.0 for i in range(len(lm))}
    for w in range(len(points)):
        if w in lset:
            continue
        ds = sorted((math.dist(points[w], points[l]), j) for j, l in enumerate(lm))[:k]
        for size in range(2, max_dim + 3):
            for combo in itertools.combinations(ds, size):
                key = tuple(sorted(j for _, j in combo))
                cost = max(d for d, _ in combo)
                if key not in values or cost < values[key]:
                    values[key] = cost
    return values


def gf2_rank(rows):
    """Rank over GF(2) of a matrix given as a list of python-int bitmasks."""
    basis = {}
    rank = 0
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top in basis:
                r ^= basis[top]
            else:
                basis[top] = r
                rank += 1
                break
    return rank


def betti_by_rank(simplices, t, max_dim):
    """Betti numbers of the subcomplex {value <= t} via boundary ranks."""
    alive = [s for s, v in simplices.items() if v <= t]
    by_dim = {}
    for s in alive:
        by_dim.setdefault(len(s) - 1, []).append(s)
    index = {d: {s: i for i, s in enumerate(sorted(ss))} for d, ss in by_dim.items()}
    ranks = {}
    for d in range(1, max_dim + 2):
        rows = []
        for s in by_dim.get(d, []):
            mask = 0
            for face in itertools.combinations(s, d):
                mask |= 1 << index[d - 1][face]
            rows.append(mask)
        ranks[d] = gf2_rank(rows)
    return [len(by_dim.get(d, [])) - ranks.get(d, 0) - ranks.get(d + 1, 0) for d in range(max_dim + 1)]


def brute_bottleneck(a, b):
    """Exhaustive bottleneck distance between two finite diagrams (lists of (b, d)).

    Enumerates every partial matching between the two point sets; unmatched
    points pay half their lifetime (distance to the diagonal).
    """
    a, b = [tuple(map(float, p)) for p in a], [tuple(map(float, p)) for p in b]
    half_a = [(d - s) / 2.0 for s, d in a]
    half_b = [(d - s) / 2.0 for s, d in b]
    best = math.inf
    for k in range(min(len(a), len(b)) + 1):
        for sa in itertools.combinations(range(len(a)), k):
            for sb in itertools.permutations(range(len(b)), k):
                worst = 0.0
                for i, j in zip(sa, sb):
                    worst = max(worst, abs(a[i][0] - b[j][0]), abs(a[i][1] - b[j][1]))
                worst = max([worst] + [half_a[i] for i in range(len(a)) if i not in sa])
                worst = max([worst] + [half_b[j] for j in range(len(b)) if j not in sb])
                best = min(best, worst)
    return best


def random_filtration_dict(rng, n_vertices, max_simplex_dim, p_edge=0.4, p_tri=0.5, p_tet=0.5):
    """Random face-monotone complex as ``{simplex: value}``.

    Values are rounded to a coarse grid so equal-value ties occur.
    """
    values = {(i,): 0.0 for i in range(n_vertices)}
    for a, b in itertools.combinations(range(n_vertices), 2):
        if rng.random() < p_edge:
            values[(a, b)] = float(rng.integers(1, 20)) / 4.0
    probs = {2: p_tri, 3: p_tet}
    for dim in range(2, max_simplex_dim + 1):
        lower = [s for s in values if len(s) == dim]
        lower_set = set(lower)
        cands = set()
        for s in lower:
            for v in range(s[-1] + 1, n_vertices):
                t = s + (v,)
                if all(f in lower_set for f in itertools.combinations(t, dim)):
                    cands.add(t)
        for t in sorted(cands):
            if rng.random() < probs[dim]:
                base = max(values[f] for f in itertools.combinations(t, dim))
                values[t] = base + float(rng.integers(0, 4)) / 4.0
    return values
