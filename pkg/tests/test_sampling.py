"""Balanced sampling draws."""

import numpy as np
import pytest

from blocksky.datamodel import Dataset, GroundTruth, Record, RecordPair
from blocksky.functions import exact_match, predicate_universe, soundex_function
from blocksky.metrics import build_index
from blocksky.sampling import (
    MATCH,
    NONMATCH,
    FeatureVector,
    SamplerState,
    TrainingSet,
    active_round,
    balance_rate,
    dissimilar_sample,
    random_sample,
    sampling_objective,
    similar_sample,
)
from blocksky.scheme import Scheme

from .oracles import brute_pair_set
from .synth import AttributeProfile, clustered_dataset, random_dataset


def fv(key, bits):
    return FeatureVector(RecordPair(f"a{key}", f"b{key}"), key, np.array(bits, dtype=bool))


def setup_random(seed=11, n=40):
    rng = np.random.default_rng(seed)
    dataset = random_dataset(rng, n=n)
    uni = predicate_universe(dataset.schema)
    index = build_index(dataset, uni)
    return dataset, uni, index


def test_balance_rate_hand_values():
    uni = predicate_universe(("a",), (exact_match(),))
    s = Scheme(uni, ((0,),))
    sample = [fv(1, [True]), fv(2, [True]), fv(3, [True]), fv(4, [False])]
    assert balance_rate(s, sample) == pytest.approx(0.5)
    assert balance_rate(s, []) == 0.0
    assert balance_rate(s, sample[3:]) == -1.0
    assert sampling_objective([s, s], sample) == pytest.approx(0.5)


def test_training_set_dedups_and_rejects_relabel():
    t = TrainingSet()
    t.add(fv(1, [True]), MATCH)
    t.add(fv(1, [True]), MATCH)  # idempotent
    assert len(t) == 1 and t.n_matches == 1
    with pytest.raises(ValueError):
        t.add(fv(1, [True]), NONMATCH)
    with pytest.raises(ValueError):
        t.add(fv(2, [True]), "X")


def test_similar_sample_draws_only_covered_pairs():
    dataset, uni, index = setup_random()
    state = SamplerState(index, seed=1)
    scheme = Scheme(uni, ((uni.index_of("name.soundex"),),
                          (uni.index_of("city.exact_match"),)))
    out = similar_sample(state, scheme, 25)
    assert out, "fixture should offer similar pairs"
    allowed = brute_pair_set(scheme, dataset)
    for vector in out:
        assert vector.pair in allowed
        assert scheme.covers(vector.bits)


def test_dissimilar_sample_avoids_covered_pairs():
    dataset, uni, index = setup_random(seed=12)
    state = SamplerState(index, seed=2)
    scheme = Scheme(uni, ((uni.index_of("name.soundex"),),))
    out = dissimilar_sample(state, scheme, 25)
    assert out
    covered = brute_pair_set(scheme, dataset)
    for vector in out:
        assert vector.pair not in covered
        assert not scheme.covers(vector.bits)


def test_dissimilar_on_universal_predicate_returns_empty():
    schema = ("name", "county")
    records = tuple(Record(f"r{i}", (f"name{i}", "same county"), schema)
                    for i in range(12))
    dataset = Dataset(schema, "dedup", (records,))
    uni = predicate_universe(schema, (exact_match(),))
    index = build_index(dataset, uni)
    state = SamplerState(index, seed=3)
    county = Scheme(uni, ((uni.index_of("county.exact_match"),),))
    assert dissimilar_sample(state, county, 10) == []
    # and it does not spin: the universal check is cached, probes stay 0
    assert state.bucket_probes == 0


def test_similar_exhausts_tiny_population_without_spinning():
    schema = ("name",)
    records = tuple(Record(f"r{i}", (v,), schema)
                    for i, v in enumerate(["x", "x", "x", "y", "z", "w"]))
    dataset = Dataset(schema, "dedup", (records,))
    uni = predicate_universe(schema, (exact_match(),))
    index = build_index(dataset, uni)
    state = SamplerState(index, seed=4)
    s = Scheme(uni, ((0,),))
    out = similar_sample(state, s, 10)
    assert len(out) == 3  # only the "x" bucket has pairs
    assert similar_sample(state, s, 10) == []


def test_no_replacement_across_draw_kinds():
    _, uni, index = setup_random(seed=13)
    state = SamplerState(index, seed=5)
    s = Scheme(uni, ((uni.index_of("name.soundex"),),))
    seen = set()
    for batch in (similar_sample(state, s, 10), dissimilar_sample(state, s, 10),
                  random_sample(state, 10)):
        for vector in batch:
            assert vector.key not in seen
            seen.add(vector.key)
    assert seen == state.sampled


def test_draws_are_reproducible():
    _, uni, index = setup_random(seed=14)
    s = Scheme(uni, ((uni.index_of("name.soundex"),),))

    def run():
        state = SamplerState(build_index(index.dataset, uni), seed=42)
        keys = [v.key for v in similar_sample(state, s, 8)]
        keys += [v.key for v in random_sample(state, 8)]
        return keys

    assert run() == run()


def test_similar_draws_are_index_backed_not_rescans():
    _, uni, index = setup_random(seed=15, n=60)
    state = SamplerState(index, seed=6)
    s = Scheme(uni, ((uni.index_of("name.soundex"),),
                     (uni.index_of("city.exact_match"),)))
    similar_sample(state, s, 5)  # warm: builds the two conjunct indexes
    builds = index.index_builds
    probes_before = state.bucket_probes
    k = 40
    similar_sample(state, s, k)
    assert index.index_builds == builds  # no index rebuilds
    assert state.bucket_probes - probes_before <= 8 * k  # bounded per-draw work


def test_random_sample_match_rate_near_imbalance():
    rng = np.random.default_rng(16)
    profiles = [AttributeProfile("name", 0.9, 400), AttributeProfile("city", 0.5, 30)]
    dataset, truth = clustered_dataset(rng, n_clusters=95, cluster_size=21,
                                       profiles=profiles, n_singletons=5)
    assert len(dataset) == 2000
    total = dataset.total_pairs
    frac = len(truth) / total
    assert 0.008 < frac < 0.012  # about 1:100
    uni = predicate_universe(dataset.schema, (exact_match(),))
    index = build_index(dataset, uni)
    state = SamplerState(index, seed=7)
    out = random_sample(state, 3000)
    assert len(out) == 3000
    hits = sum(1 for v in out if v.pair in truth)
    expect = 3000 * frac
    sigma = (3000 * frac * (1 - frac)) ** 0.5
    assert abs(hits - expect) < 5 * sigma


def test_active_round_branches_on_balance():
    dataset, uni, index = setup_random(seed=17)
    state = SamplerState(index, seed=8)
    s = Scheme(uni, ((uni.index_of("name.soundex"),),))
    covered = brute_pair_set(s, dataset)

    # empty sample: balance 0 -> similar draw
    out = active_round(state, [s], 5, [])
    assert out and all(v.pair in covered for v in out)

    # covered-heavy sample: balance > 0 -> dissimilar draw
    heavy = [v for v in out]
    out2 = active_round(state, [s], 5, heavy)
    assert out2 and all(v.pair not in covered for v in out2)


def test_active_round_respects_limit():
    _, uni, index = setup_random(seed=18)
    state = SamplerState(index, seed=9)
    schemes = [Scheme(uni, ((i,),)) for i in range(4)]
    out = active_round(state, schemes, 10, [], limit=7)
    assert len(out) <= 7
