"""Hand-built datasets with planted, exactly countable structure.

`margin_dataset` lays out duplicate clusters whose disagreement patterns
and cross-cluster collisions follow explicit schedules, so the exact
confusion counts of every blocking scheme are consequences of the
construction rather than of a random draw.  Tests that compare learned
skylines against brute-force enumeration need those counts to sit at
comfortable margins, which random generators cannot promise.

Layout: 50 clusters of 4 members over six attributes.  The first three
attributes carry the signal; the last three keep their shared value on
only one member per cluster, so they never block a within-cluster pair
and act as pure noise.  Cross-cluster collisions are planted as
"groups": records in a group share a junk value on one attribute (or on
a pair of attributes, to give conjunctions a nonzero false-pair count).

`imbalance_dataset` builds a heavily imbalanced deduplication workload
(about 1 match per 99 non-matches) with a three-point skyline whose
coordinates are exact by construction.  See its docstring for layout.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from blocksky.datamodel import Dataset, GroundTruth, Record, RecordPair

ATTRS = ("name", "email", "city", "street", "phone", "note")
MEMBERS = 4
SIGNAL = (0, 1, 2)

# Per cluster type: which member replaces which signal attributes.
# Types 4..6 replace two attributes on one member; their slots carry
# paired collision values so that conjunctions of two signal attributes
# also see false pairs, and their pairs agree on exactly one attribute.
# Types 7..9 split two mutations across members, breaking one pairwise
# disjunction; type 10 breaks all three at once, so only the full
# disjunction covers every pair.
SIGNAL_MUTATIONS = (
    {},
    {0: (0,)},
    {0: (1,)},
    {0: (2,)},
    {0: (0, 1)},
    {0: (0, 2)},
    {0: (1, 2)},
    {0: (0,), 1: (1,)},
    {0: (0,), 1: (2,)},
    {0: (1,), 1: (2,)},
    {0: (1,), 1: (0,), 2: (2,)},
)

# Junk attributes lose their shared value on three members per cluster.
JUNK_MUTATIONS = {3: (0, 1, 2), 4: (0, 1, 3), 5: (0, 2, 3)}

# Member whose junk slot may join a collision group, one per attribute,
# chosen so no record can sit in two groups at once.
JUNK_GROUP_MEMBER = {3: 3, 4: 2, 5: 1}


@dataclass(frozen=True)
class MarginSpec:
    """Knobs of the planted layout.

    type_counts: clusters per cluster type, summing to the cluster count.
    single_groups: per signal attribute, sizes of its collision groups.
    double_groups: per attribute pair (0,1), (0,2), (1,2), group sizes.
    junk_groups: per junk attribute, group sizes.

    A group of size s contributes s*(s-1)/2 false pairs to every scheme
    that blocks on the shared value.
    """

    type_counts: tuple[int, ...] = (6, 4, 6, 2, 6, 6, 5, 4, 4, 2, 5)
    single_groups: tuple[tuple[int, ...], ...] = ((6, 5, 4), (2,), (2,))
    double_groups: tuple[tuple[int, ...], ...] = ((6,), (3,), (5,))
    junk_groups: tuple[tuple[int, ...], ...] = ((4, 3), (4, 3), (4, 3))


def _schedule(spec: MarginSpec) -> list[int]:
    """Cluster types interleaved round-robin, not in blocks."""
    remaining = list(spec.type_counts)
    order: list[int] = []
    while sum(remaining) > 0:
        for t, left in enumerate(remaining):
            if left > 0:
                order.append(t)
                remaining[t] -= 1
    return order


def _take_slots(slots: list[tuple[int, int]], sizes: tuple[int, ...],
                label: str) -> list[list[tuple[int, int]]]:
    if sum(sizes) > len(slots):
        raise ValueError(f"{label}: {sum(sizes)} slots wanted, "
                         f"{len(slots)} available")
    out = []
    start = 0
    for size in sizes:
        out.append(slots[start:start + size])
        start += size
    return out


def margin_dataset(spec: MarginSpec = MarginSpec()) -> tuple[Dataset, GroundTruth]:
    """Build the planted dataset and its ground truth."""
    schedule = _schedule(spec)
    n_clusters = len(schedule)

    values = [[[f"{ATTRS[a]}_c{ci:02d}" for a in range(len(ATTRS))]
               for _ in range(MEMBERS)] for ci in range(n_clusters)]

    for ci, t in enumerate(schedule):
        for member, attrs in SIGNAL_MUTATIONS[t].items():
            for a in attrs:
                values[ci][member][a] = f"{ATTRS[a]}_u{ci:02d}{member}"
        for a, members in JUNK_MUTATIONS.items():
            for member in members:
                values[ci][member][a] = f"{ATTRS[a]}_u{ci:02d}{member}"

    # Collision groups.  Every slot list holds at most one member per
    # cluster and no record appears in two lists, so each planted group
    # contributes exactly its own pairs and nothing else.
    grouped: set[tuple[int, int]] = set()

    def plant(groups, attrs, tag):
        for gid, group in enumerate(groups):
            for ci, member in group:
                assert (ci, member) not in grouped
                grouped.add((ci, member))
                for a in attrs:
                    values[ci][member][a] = f"{ATTRS[a]}_{tag}{gid}"

    for a in SIGNAL:
        slots = [(ci, member)
                 for ci, t in enumerate(schedule)
                 for member, attrs in SIGNAL_MUTATIONS[t].items()
                 if attrs == (a,)]
        plant(_take_slots(slots, spec.single_groups[a], f"single {ATTRS[a]}"),
              (a,), f"g{a}")

    for idx, pair in enumerate(combinations(SIGNAL, 2)):
        slots = [(ci, member)
                 for ci, t in enumerate(schedule)
                 for member, attrs in SIGNAL_MUTATIONS[t].items()
                 if attrs == pair]
        plant(_take_slots(slots, spec.double_groups[idx],
                          f"double {pair}"), pair, f"d{idx}")

    for a, member in JUNK_GROUP_MEMBER.items():
        slots = [(ci, member) for ci, t in enumerate(schedule)
                 if member not in SIGNAL_MUTATIONS[t]]
        plant(_take_slots(slots, spec.junk_groups[a - 3], f"junk {ATTRS[a]}"),
              (a,), f"j{a}")

    records = tuple(
        Record(f"r{ci:02d}{member}", tuple(values[ci][member]), ATTRS)
        for ci in range(n_clusters) for member in range(MEMBERS))
    dataset = Dataset(ATTRS, "dedup", (records,))

    matches = [
        RecordPair.canonical(f"r{ci:02d}{a}", f"r{ci:02d}{b}")
        for ci in range(n_clusters)
        for a, b in combinations(range(MEMBERS), 2)]
    return dataset, GroundTruth(matches)


# Imbalanced workload.  Clusters pair up into zip groups; the shared
# name/city tokens are keyed by zip group, so agreement on name or city
# implies agreement on zip and conjoining zip never changes a count.
IMB_CLUSTERS = 95
IMB_SIZE = 21
IMB_SINGLETONS = 5
IMB_KEPT_NAME = 14  # members per cluster that keep the shared name
IMB_KEPT_CITY = 7   # drawn from the name keepers: agree(city) => agree(name)
IMB_NAME_GROUPS = range(0, 27)   # zip groups whose kept names collide
IMB_CITY_GROUPS = range(27, 42)  # disjoint, so name & city has no false pairs
IMB_SCHEMA = ("zip", "name", "city")


def _zip_group(cluster: int) -> int:
    # pairs of clusters share a zip; the last three form one triple
    return cluster // 2 if cluster < 92 else 46


def imbalance_dataset(seed: int = 13) -> tuple[Dataset, GroundTruth]:
    """Build the imbalanced dataset and its ground truth.

    95 clusters of 21 duplicates plus 5 singletons make 2,000 records and
    19,950 matching pairs, about 1 match per 99 candidate non-matches.
    The three attributes behave exactly by construction:

    * ``zip``: every cluster member shares it and so does the paired
      cluster, so it blocks every match (completeness exactly 1) and the
      pairing supplies its false pairs.
    * ``name``: 14 of 21 members keep the cluster name, the rest get
      unique strings, so completeness is C(14,2)/C(21,2) = 91/210.  In
      zip groups 0-26 the kept name is shared across the whole group,
      planting cross-cluster false pairs.
    * ``city``: 7 keepers drawn from the name keepers.  City collisions
      live in zip groups 27-41, disjoint from name's, so ``name & city``
      keeps city's true pairs and none of its false ones.

    ``zip`` heads the schema so samplers that visit attributes in schema
    order draw the all-completeness attribute first.  Which members keep
    the shared tokens varies with `seed`; the counts above do not.
    """
    rng = np.random.default_rng(seed)
    records = []
    matches = []
    rid = 0
    for cluster in range(IMB_CLUSTERS):
        keep_name = rng.choice(IMB_SIZE, size=IMB_KEPT_NAME, replace=False)
        keep_city = set(rng.choice(keep_name, size=IMB_KEPT_CITY,
                                   replace=False).tolist())
        keep_name = set(keep_name.tolist())
        group = _zip_group(cluster)
        shared_name = (f"name_g{group}" if group in IMB_NAME_GROUPS
                       else f"name_c{cluster}")
        shared_city = (f"city_g{group}" if group in IMB_CITY_GROUPS
                       else f"city_c{cluster}")
        members = []
        for m in range(IMB_SIZE):
            name = shared_name if m in keep_name else f"name_u{cluster}_{m}"
            city = shared_city if m in keep_city else f"city_u{cluster}_{m}"
            key = f"r{rid:04d}"
            records.append(Record(key, (f"zip_g{group}", name, city),
                                  IMB_SCHEMA))
            members.append(key)
            rid += 1
        matches.extend(RecordPair.canonical(a, b)
                       for a, b in combinations(members, 2))
    for s in range(IMB_SINGLETONS):
        records.append(Record(f"r{rid:04d}",
                              (f"zip_s{s}", f"name_s{s}", f"city_s{s}"),
                              IMB_SCHEMA))
        rid += 1
    return Dataset(IMB_SCHEMA, "dedup", (tuple(records),)), GroundTruth(matches)
