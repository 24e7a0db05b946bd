"""Independent reference implementations used to check the fast paths.

Everything here works record by record, straight from the definitions,
without inverted indexes or packed keys.
"""

from itertools import combinations, product

from blocksky.datamodel import RecordPair
from blocksky.functions import predicate_agrees
from blocksky.metrics import ConfusionCounts


def all_pairs(dataset):
    """Every comparable pair, canonical, in deterministic order."""
    if dataset.mode == "dedup":
        for a, b in combinations(dataset.sources[0], 2):
            yield RecordPair.canonical(a.id, b.id), (a, b)
    else:
        for a, b in product(dataset.sources[0], dataset.sources[1]):
            yield RecordPair(a.id, b.id), (a, b)


def pair_bits(universe, left, right):
    return [predicate_agrees(p, left, right) for p in universe]


def covers_pair(scheme, left, right):
    return scheme.covers(pair_bits(scheme.universe, left, right))


def brute_confusion(scheme, dataset, truth):
    """Confusion counts by scanning every pair with predicate_agrees."""
    tp = fp = fn = tn = 0
    for pair, (a, b) in all_pairs(dataset):
        covered = covers_pair(scheme, a, b)
        is_match = pair in truth
        if covered and is_match:
            tp += 1
        elif covered:
            fp += 1
        elif is_match:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def brute_pair_set(scheme, dataset):
    """All pairs a scheme co-blocks, as a set of RecordPair."""
    out = set()
    for pair, (a, b) in all_pairs(dataset):
        if covers_pair(scheme, a, b):
            out.add(pair)
    return out


def naive_dominance(points):
    """Indices of points not dominated by any other (max-max, ties kept)."""
    keep = []
    for i, (pci, pqi) in enumerate(points):
        dominated = any(
            pcj >= pci and pqj >= pqi and (pcj > pci or pqj > pqi)
            for j, (pcj, pqj) in enumerate(points) if j != i)
        if not dominated:
            keep.append(i)
    return keep


def enumerate_schemes(universe, max_ary):
    """Every canonical scheme that uses at most max_ary distinct predicates.

    For each predicate support, emits all antichains of conjuncts whose
    union is exactly that support, so each canonical scheme appears once.
    """
    from blocksky.scheme import Scheme

    out = []
    for size in range(1, max_ary + 1):
        for support in combinations(range(len(universe)), size):
            conjuncts = []
            for r in range(1, size + 1):
                conjuncts.extend(combinations(support, r))
            n = len(conjuncts)
            for mask in range(1, 1 << n):
                chosen = [conjuncts[i] for i in range(n) if mask >> i & 1]
                union = set()
                for c in chosen:
                    union.update(c)
                if union != set(support):
                    continue
                ok = True
                for a in chosen:
                    for b in chosen:
                        if a != b and set(a) <= set(b):
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    out.append(Scheme(universe, tuple(chosen)))
    return out
