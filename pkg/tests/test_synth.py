import io
from collections import Counter

import networkx as nx
import numpy as np
import pytest

from keiretsunet.errors import InputError
from keiretsunet.graph import build_bipartite, project, to_networkx
from keiretsunet.ingest import parse_memberships, parse_subsidiaries, write_memberships, write_subsidiaries
from keiretsunet.synth import ASEAN_OWNER_COUNTS, PlantSpec, generate, power_curve, same_group_fraction, write_dataset


def test_zero_subsidiaries_still_emits_memberships():
    recs, ms = generate(PlantSpec(subsidiaries=0))
    assert recs == []
    assert len(ms) == 300


def test_counts_and_ids():
    spec = PlantSpec(groups=4, investors_per_group=10, unaffiliated_investors=5, subsidiaries=123, seed=3)
    recs, ms = generate(spec)
    assert len(recs) == 123
    assert len({r.subsidiary_id for r in recs}) == 123
    assert len(ms) == 40
    assert len({m.group for m in ms}) == 4
    ids = {o for r in recs for o in r.owner_ids}
    assert len(ids) <= 45


def test_determinism():
    spec = PlantSpec(subsidiaries=200, seed=9)
    assert generate(spec) == generate(spec)
    assert generate(spec)[0] != generate(PlantSpec(subsidiaries=200, seed=10))[0]


def test_records_pass_ingest_validation():
    recs, ms = generate(PlantSpec(subsidiaries=500, seed=1))
    for r in recs:
        assert all(0 < s <= 1 for _, s in r.owners)
        assert sum(s for _, s in r.owners) + r.local_share <= 1 + 1e-6
        assert len(set(r.owner_ids)) == len(r.owner_ids)
    buf = io.StringIO()
    write_subsidiaries(recs, buf)
    assert parse_subsidiaries(buf.getvalue()) == recs
    buf = io.StringIO()
    write_memberships(ms, buf)
    assert parse_memberships(buf.getvalue()) == ms


def test_full_mixing_keeps_owners_in_one_group():
    recs, ms = generate(PlantSpec(p_in=1.0, subsidiaries=400, seed=2))
    group = {m.investor_id: m.group for m in ms}
    multi = [r for r in recs if len(r.owners) > 1]
    assert multi
    assert all(len({group[o] for o in r.owner_ids}) == 1 for r in multi)
    assert same_group_fraction(recs, ms) == 1.0


def test_same_group_fraction_matches_p_in():
    fractions = [same_group_fraction(*generate(PlantSpec(seed=s))) for s in range(10)]
    assert abs(float(np.mean(fractions)) - 0.8) <= 0.05


def test_owner_count_shape_follows_calibration():
    recs, _ = generate(PlantSpec(subsidiaries=4000, seed=4))
    counts = Counter(min(len(r.owners), 5) for r in recs)
    target = np.array(ASEAN_OWNER_COUNTS) / sum(ASEAN_OWNER_COUNTS)
    got = np.array([counts[k] for k in range(1, 6)]) / len(recs)
    assert np.abs(got - target).max() < 0.03


def test_mean_capital_near_calibration():
    recs, _ = generate(PlantSpec(subsidiaries=4000, seed=5))
    caps = [r.paidup_capital for r in recs]
    assert 0.9 * 21980 < np.mean(caps) < 1.1 * 21980


def test_full_mixing_splits_network_into_group_components():
    spec = PlantSpec(p_in=1.0, subsidiaries=600, owners_per_subsidiary=(0, 1), seed=6)
    recs, _ = generate(spec)
    g = to_networkx(project(build_bipartite(recs)))
    assert nx.number_connected_components(g) >= spec.groups


@pytest.mark.parametrize(
    "kwargs",
    [
        {"p_in": 1.5},
        {"p_in": -0.1},
        {"groups": 0},
        {"groups": 7},
        {"investors_per_group": 0},
        {"groups": 1, "investors_per_group": 2, "owners_per_subsidiary": (1, 1, 1)},
        {"owners_per_subsidiary": ()},
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(InputError):
        generate(PlantSpec(**kwargs))


def test_golden_fixture_regression(golden_dir, tmp_path):
    recs, ms = generate(PlantSpec(seed=42))
    write_dataset(recs, ms, tmp_path)
    for name in ("subsidiaries.csv", "memberships.csv", "macroareas.csv"):
        assert (tmp_path / name).read_bytes() == (golden_dir / name).read_bytes(), name


def test_power_curve_one_row():
    spec = PlantSpec(groups=2, investors_per_group=8, subsidiaries=60, seed=1)
    [row] = power_curve(spec, [0.9], replicas=10, runs=2, mc_samples=199)
    assert row.p_in == 0.9 and row.replicas == 10
    assert len(row.p_values) == 10
    assert 0.0 <= row.rejection_rate <= 1.0


def test_power_curve_replicas_validated():
    with pytest.raises(InputError):
        power_curve(PlantSpec(), [0.5], replicas=9)
