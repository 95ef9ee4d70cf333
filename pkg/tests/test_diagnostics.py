from anongame import diagnostics


def test_representative_pairs_share_data():
    rows = diagnostics.representative_pairs(50, 0.5, pairs=5, seed=1)
    assert len(rows) == 5
    for r in rows:
        assert r["moment_gap"] <= r["eps"]
        assert 0 <= r["tv"] <= 1


def test_sweeps_hold():
    assert min(r["min_slack"] for r in diagnostics.eigenvalue_sweep(seeds=10)) >= -1e-9
    assert min(r["slack"] for r in diagnostics.variance_sweep(samples=200)) >= -1e-12
    rows = diagnostics.transfer_checks(pairs=10)
    assert all(r["regret_y"] <= r["bound"] + 1e-9 for r in rows)


def test_gaussian_tv_shrinks():
    for k in (2, 3):
        tv = [r["tv"] for r in diagnostics.gaussian_tv(k=k)]
        assert tv[0] > tv[1] > tv[2]


def test_lipschitz_trend_rows():
    rows = diagnostics.lipschitz_trend(ns=(10, 20), k=3)
    assert [r["n"] for r in rows] == [10, 20]
    assert all(0 <= r["lipschitz"] <= 0.5 for r in rows)
