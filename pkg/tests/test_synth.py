import itertools
import math

import numpy as np
import pytest

from oracles import brute_force_t3
from table22 import TABLE_21
from triplehelix.classifier import classification_table, profile_document
from triplehelix.corpus import corpus_stats, parse_records
from triplehelix.errors import HelixError
from triplehelix.helix import cube_from_profiles, helix_report, linear_trend, t_trajectory
from triplehelix.infotheory import ContingencyCube, transmission3
from triplehelix.synth import (
    SCI2000_ALL_CELLS,
    CorpusSpec,
    cells_for_t,
    gen_corpus,
    gen_documents,
    gen_profiles,
    gen_series,
    joint_distribution,
    largest_remainder,
    sci2000_spec,
    with_seed,
)
from triplehelix.systemness import systemness_test


def test_largest_remainder():
    assert list(largest_remainder(10, [1, 1, 1])) == [4, 3, 3]
    assert list(largest_remainder(7, [0.5, 0.25, 0.25])) == [3, 2, 2]
    assert largest_remainder(0, [1, 2]).sum() == 0
    with pytest.raises(HelixError):
        largest_remainder(5, [0, 0])


def test_determinism():
    spec = CorpusSpec(500, years=(1998, 2000), p_u=0.6, p_i=0.1, p_g=0.3,
                      countries={"USA": 3, "JAPAN": 1, "FRANCE": 1}, p_international=0.2, seed=42)
    assert gen_corpus(spec) == gen_corpus(spec)
    assert gen_corpus(spec) != gen_corpus(with_seed(spec, 43))
    a = gen_series("independent_trends", {"n0": 5000}, seed=9).series
    b = gen_series("independent_trends", {"n0": 5000}, seed=9).series
    assert np.array_equal(a.counts, b.counts)


def test_three_single_sector_blocks():
    spec = CorpusSpec(3, coupling="explicit_cube",
                      cube_weights={(1, 0, 0): 1, (0, 1, 0): 1, (0, 0, 1): 1}, exact=True, seed=5)
    text = gen_corpus(spec)
    docs = parse_records(text)
    assert len(docs) == 3
    got = sorted(profile_document(d).cell for d in docs)
    assert got == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    u_doc = next(d for d in docs if profile_document(d).cell == (1, 0, 0))
    assert any("UNIV" in a.tokens or "COLL" in a.tokens for a in u_doc.addresses)


def test_exact_mode_reproduces_table_22_all_cells():
    spec = CorpusSpec(676511, coupling="explicit_cube", cube_weights=SCI2000_ALL_CELLS, exact=True)
    gen = gen_profiles(spec)
    cube, excluded = cube_from_profiles(gen.profiles)
    assert excluded == 0 and cube.n == 676511
    for cell, v in SCI2000_ALL_CELLS.items():
        assert cube[cell] == v
    assert round(transmission3(cube).t_uig_mbits, 1) == -77.0


def test_coupling_regimes():
    indep = gen_profiles(CorpusSpec(200_000, p_u=0.4, p_i=0.3, p_g=0.6, seed=1))
    assert abs(transmission3(indep.cube).t_uig_mbits) < 1.0
    xor = gen_profiles(CorpusSpec(200_000, coupling="bilateral_xor", seed=1))
    # sample space including the unidentified cell (0,0,0)
    assert transmission3(xor.cube).t_uig_mbits == pytest.approx(-1000.0, abs=5.0)
    coord = gen_profiles(CorpusSpec(200_000, coupling="coordinated", rho=1.0, seed=1))
    assert transmission3(coord.cube).t_uig_mbits == pytest.approx(1000.0, abs=5.0)
    # the generating joint itself is an exact oracle
    for joint, expect in [(xor.joint, -1.0), (coord.joint, 1.0)]:
        bits = brute_force_t3({c: joint[c] for c in itertools.product((0, 1), repeat=3)})
        assert bits == pytest.approx(expect, abs=1e-12)


def test_corpus_round_trips_to_profiles():
    spec = CorpusSpec(3000, years=(1999, 2000), p_u=0.7, p_i=0.2, p_g=0.4, coupling="coordinated",
                      rho=0.3, countries={"USA": 2, "UK": 1, "PEOPLES R CHINA": 1},
                      p_international=0.3, n_without_address=50,
                      extra_addresses={"University": 400, "Unidentified": 100}, seed=3)
    docs = parse_records(gen_corpus(spec))
    _, profiles = gen_documents(spec)
    with_addr = [d for d in docs if d.addresses]
    assert [profile_document(d) for d in with_addr] == profiles
    assert sum(1 for d in docs if not d.addresses) == 50
    assert sum(1 for d in with_addr if len(d.countries) >= 2) == pytest.approx(900, abs=120)


def test_sci2000_profile_small_scale():
    spec = sci2000_spec(scale=0.01)
    docs = parse_records(gen_corpus(spec))
    stats = corpus_stats(docs)
    assert stats.total_records == round(778446 * 0.01)
    assert stats.records_without_address == round(778446 * 0.01) - round(725354 * 0.01)
    table = classification_table(docs)
    assert table.total == sum(round(v * 0.01) for v in TABLE_21.values())


def test_series_regimes():
    m = gen_series("markov_stationary", {"noise": False, "n_categories": 5}, seed=2)
    (score,) = systemness_test(m.series, m.series.years[-1]).scores
    assert score.info_markov_mbits == 0.0
    t = gen_series("independent_trends", {"noise": False, "n_categories": 5}, seed=2)
    (score,) = systemness_test(t.series, t.series.years[-1]).scores
    assert score.info_trend_mbits == pytest.approx(0.0, abs=1e-9)
    assert m.regime == "markov_stationary" and t.regime == "independent_trends"


def test_linear_t_decline_recovered():
    gen = gen_series("linear_T_decline", {"n0": 20_000, "slope": -15.0, "t0": -30.0}, seed=4)
    traj = t_trajectory(gen.hits)
    fit = linear_trend(traj)
    assert fit.slope == pytest.approx(-15.0, rel=0.10)
    assert fit.r_squared > 0.95
    exact = gen_series("linear_T_decline", {"n0": 10**6, "noise": False}, seed=0)
    for (_, got), want in zip(t_trajectory(exact.hits), exact.target_t_mbits):
        assert got == pytest.approx(want, abs=0.05)


def test_cells_for_t_hits_target():
    for target in (-5.0, -77.0, -200.0, -400.0):
        probs = cells_for_t(target)
        assert probs[0, 0, 0] == 0
        bits = brute_force_t3({c: probs[c] for c in itertools.product((0, 1), repeat=3)})
        assert 1000 * bits == pytest.approx(target, abs=1e-6)
    with pytest.raises(HelixError):
        cells_for_t(+10.0)


def test_sampling_error_shrinks_like_inverse_sqrt_n():
    spec = CorpusSpec(0, coupling="explicit_cube", cube_weights=SCI2000_ALL_CELLS)
    truth = transmission3(ContingencyCube(joint_distribution(spec))).t_uig_mbits
    rms = {}
    for n in (10**3, 10**4, 10**5):
        errs = []
        for seed in range(30):
            gen = gen_profiles(CorpusSpec(n, coupling="explicit_cube", cube_weights=SCI2000_ALL_CELLS, seed=seed))
            errs.append(transmission3(gen.cube).t_uig_mbits - truth)
        rms[n] = math.sqrt(np.mean(np.square(errs)))
    # each tenfold increase should cut the error by about sqrt(10) = 3.16
    for small, big in [(10**3, 10**4), (10**4, 10**5)]:
        assert 1.8 < rms[small] / rms[big] < 5.5


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_documents": -1},
        {"n_documents": 10, "p_u": 1.5},
        {"n_documents": 10, "coupling": "chaotic"},
        {"n_documents": 10, "coupling": "explicit_cube"},
        {"n_documents": 10, "coupling": "explicit_cube", "cube_weights": {(1, 0, 0): -1}},
        {"n_documents": 10, "countries": {"USA": 0}},
        {"n_documents": 10, "p_international": 0.5},
        {"n_documents": 10, "countries": {"UNIV LAND": 1}},
        {"n_documents": 10, "years": (2001, 2000)},
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(HelixError):
        CorpusSpec(**kwargs)


def test_invalid_series_params():
    with pytest.raises(HelixError):
        gen_series("random_walk")
    with pytest.raises(HelixError):
        gen_series("markov_stationary", {"years": (2000, 2001)})
    with pytest.raises(HelixError):
        gen_series("independent_trends", {"n_categories": 2, "rates": [1.0, -1.0]})
    with pytest.raises(HelixError):
        gen_series("linear_T_decline", {"t0": 50.0})


@pytest.mark.slow
def test_usa_slice_of_sci_profile():
    spec = CorpusSpec(50_000, coupling="explicit_cube", cube_weights=SCI2000_ALL_CELLS,
                      countries={"USA": 1, "JAPAN": 1}, exact=True, seed=8)
    docs, _ = gen_documents(spec)
    row = helix_report(docs, slice="USA")
    assert row.number == 25_000
    assert row.t_uig_mbits == pytest.approx(-77.0, abs=2.0)
