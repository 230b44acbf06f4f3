"""Acceptance criteria 1-10. Each test records one PASS/FAIL line, shown in the pytest summary."""
import math
import time

import numpy as np
import pytest

from entpoly import cli, filtering, montecarlo, polytope, tomo
from entpoly.prng import Stream
from entpoly.qcore import canonical_state, fidelity_pure, local_spectra

N = 100_000
PSI1 = canonical_state("PSI1")
PSI2 = canonical_state("PSI2")


@pytest.fixture(scope="module")
def four_qubit_tally():
    start = time.perf_counter()
    tally = montecarlo.volume_estimate(4, N, seed=0)
    return tally, time.perf_counter() - start


def test_1_exact_spectra(report):
    err = max(abs(x - 0.5) for s in (PSI1, PSI2) for x in local_spectra(s))
    ok = err <= 1e-12
    report(1, ok, f"max |lambda - 1/2| = {err:.1e} (tol 1e-12)")
    assert ok


def test_2_success_probabilities(report):
    expected = dict(zip("abcdef", (0.2917, 0.2222, 0.1667, 0.1768, 0.5, 0.5)))
    got = {}
    for label, (name, t, g) in filtering.REFERENCE_SETTINGS.items():
        got[label] = filtering.run_protocol(canonical_state(name), filtering.FilterSetting(t, g)).success
    worst = max(abs(got[k] - expected[k]) for k in expected)
    ok = worst <= 5e-4
    report(2, ok, "success " + " ".join(f"{k}={v:.4f}" for k, v in got.items()) + f", max dev {worst:.1e} (tol 5e-4)")
    assert ok


def test_3_polytope_discrimination(report):
    p4 = polytope.facets("P4")
    fs = []
    ok = True
    for label in "abcde":
        _, t, g = filtering.REFERENCE_SETTINGS[label]
        res = filtering.run_protocol(PSI1, filtering.FilterSetting(t, g))
        fs.append(res.f)
        ok &= res.f >= 1 - 1e-9 and bool(p4.satisfied(res.full_spectra, 1e-9))
    _, t, g = filtering.REFERENCE_SETTINGS["f"]
    f_psi2 = filtering.run_protocol(PSI2, filtering.FilterSetting(t, g)).f
    ok &= abs(f_psi2 - 0.5) <= 1e-9
    report(3, ok, f"psi1 a-e min f = {min(fs):.6f} (>= 1), inside P4; psi2 row f f = {f_psi2:.12f}")
    assert ok


def test_4_three_qubit_volume(report):
    start = time.perf_counter()
    frac = montecarlo.volume_estimate(3, N, seed=0).fraction("W3")
    ok = abs(frac - 0.9398) <= 0.004
    report(4, ok, f"W3 fraction {frac:.5f} (0.9398 +/- 0.004), {time.perf_counter() - start:.1f}s")
    assert ok


def test_5_four_qubit_volume(report, four_qubit_tally):
    t, elapsed = four_qubit_tally
    p4, p5, p6, p7 = t.fraction("P4"), t.fraction("P5"), t.fraction("P6"), t.fraction("P7")
    p3 = [t.counts[f"P3{v}"] for v in "abcdef"]
    spread = max(p3) - min(p3)
    checks = [
        abs(p4 - 0.9905) <= 0.004,
        abs(p5 - 0.1302) <= 0.005,
        p6 >= 0.9999,
        t.counts["P7"] == t.num_samples,
        spread <= 5 * math.sqrt(N),
        elapsed <= 60,
    ]
    ok = all(checks)
    report(5, ok, f"P4 {p4:.5f}, P5 {p5:.5f}, P6 union {p6:.5f}, P7 {p7:.5f}, "
                  f"P3 spread {spread} (<= {5 * math.sqrt(N):.0f}), {elapsed:.1f}s")
    assert ok


def test_6_postmeasure_boost(report, four_qubit_tally):
    t, _ = four_qubit_tally
    post = montecarlo.postmeasure_experiment(N, seed=0)
    direct = 1 - t.fraction("P4")
    ok = abs(post - 0.0602) <= 0.005 and abs(direct - 0.0095) <= 0.004
    report(6, ok, f"outside W3 after post-selection {post:.5f} (0.0602 +/- 0.005), "
                  f"outside P4 direct {direct:.5f} (0.0095 +/- 0.004)")
    assert ok


def test_7_oracle_equivalence(report):
    rng = np.random.default_rng(7)
    parts = []
    ok = True
    for pid in ("P4", "P7", "GHZ3", "W3"):
        p = polytope.get(pid)
        pts = rng.uniform(0.5, 1, size=(10_000, p.dimension))
        slack = polytope.facets(pid).slacks(pts).min(axis=1)
        keep = np.abs(slack) > 1e-7
        agree = sum(polytope.contains_lp(p, x) == (s > 0) for x, s in zip(pts[keep], slack[keep]))
        ok &= agree == keep.sum()
        parts.append(f"{pid} {agree}/{keep.sum()}")
    report(7, ok, "facet vs LP agreement " + ", ".join(parts))
    assert ok


def test_8_lattice(report):
    rep = polytope.verify_lattice()
    report(8, rep.ok, f"{rep.edges_checked} edges checked, {len(rep.violations)} violations, "
                      f"P5 in all others: {rep.p5_below_all}")
    assert rep.ok


def test_9_tomography(report):
    good = sum(
        fidelity_pure(tomo.reconstruct(tomo.simulate_counts(PSI2, 1e4, Stream(seed))), PSI2) >= 0.99
        for seed in range(20)
    )
    # spread of the spectra, aggregated as RMS over qubits
    stds = []
    for n_set in (1e4, 4e4):
        ds = tomo.simulate_counts(PSI2, n_set, Stream(100))
        res = tomo.bootstrap_spectra(ds, 1000, seed=101)
        stds.append(math.sqrt(np.mean(np.square(res.spectra_std))))
    ratio = stds[0] / stds[1]
    ok = good >= 18 and 1.6 <= ratio <= 2.4
    report(9, ok, f"fidelity >= 0.99 on {good}/20 seeds (need 18); bootstrap std ratio {ratio:.3f} (1.6-2.4)")
    assert ok


def test_10_determinism(report, tmp_path):
    argv = ["volume", "-N", "20000", "--shards", "4", "--seed", "5"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(argv + ["--out", str(a)])
    cli.main(argv + ["--out", str(b)])
    identical = a.read_bytes() == b.read_bytes()
    merged = montecarlo.SampleTally.empty(4)
    for i, size in enumerate(montecarlo.shard_sizes(N, 8)):
        merged = montecarlo.tally_merge(merged, montecarlo.run_shard(4, size, 0, i))
    single = montecarlo.volume_estimate(4, N, seed=0, shards=8)
    same = merged.counts == single.counts and merged.unions == single.unions
    ok = identical and same
    report(10, ok, f"cli volume byte-identical: {identical}; 8 merged shards equal sharded run: {same}")
    assert ok
