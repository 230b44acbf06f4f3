import math

import numpy as np
import pytest

from entpoly import tomo
from entpoly.prng import Stream
from entpoly.qcore import DensityMatrix, canonical_state, fidelity_pure, local_spectra

PSI2 = canonical_state("PSI2")


def _rho(state):
    return np.outer(state.amplitudes, state.amplitudes.conj())


def test_settings_enumeration():
    assert len(tomo.settings(4)) == 81
    assert tomo.settings(1) == ["X", "Y", "Z"]


def test_rotations_map_eigenvectors_to_zero_outcome():
    plus = {
        "X": np.array([1, 1]) / math.sqrt(2),
        "Y": np.array([1, 1j]) / math.sqrt(2),
        "Z": np.array([1, 0]),
    }
    for b, v in plus.items():
        assert np.allclose(tomo.PAULIS[b] @ v, v)
        assert tomo.outcome_probabilities(np.outer(v, v.conj()), b) == pytest.approx([1, 0], abs=1e-15)


class TestSimulate:
    def test_deterministic_outcome(self):
        ds = tomo.simulate_counts(canonical_state("BASIS", 1, 0), 1e6, Stream(0))
        z = ds.counts["Z"]
        assert z[0] / z.sum() == pytest.approx(1, abs=0.002)

    def test_ghz_populations(self):
        ds = tomo.simulate_counts(PSI2, 1e4, Stream(1))
        c = ds.counts["ZZZZ"]
        assert c[0] / c.sum() == pytest.approx(0.5, abs=0.02)
        assert c[15] / c.sum() == pytest.approx(0.5, abs=0.02)
        assert c[0] + c[15] == c.sum()

    def test_reproducible(self):
        a = tomo.simulate_counts(PSI2, 1e3, Stream(4))
        b = tomo.simulate_counts(PSI2, 1e3, Stream(4))
        assert all(np.array_equal(a.counts[s], b.counts[s]) for s in a.counts)

    def test_errors(self):
        with pytest.raises(ValueError):
            tomo.simulate_counts(PSI2, 0.5, Stream(0))
        with pytest.raises(ValueError):
            tomo.simulate_counts(canonical_state("GHZ", 5), 10, Stream(0))


def _noiseless(rho, n, scale=10**9):
    counts = {s: np.round(scale * tomo.outcome_probabilities(rho, s)).astype(np.int64) for s in tomo.settings(n)}
    return tomo.TomoDataset(n, scale, counts)


class TestReconstruct:
    def test_noiseless_product(self):
        rho = _rho(canonical_state("BASIS", 4, 0))
        out = tomo.reconstruct(_noiseless(rho, 4))
        assert np.allclose(out.matrix, rho, atol=1e-10)

    def test_noiseless_general(self, rng):
        from conftest import random_state
        rho = _rho(random_state(rng, 3))
        out = tomo.reconstruct(_noiseless(rho, 3, 10**12))
        assert np.allclose(out.matrix, rho, atol=1e-6)

    def test_psi2_fidelity_over_seeds(self):
        for seed in range(20):
            rho = tomo.reconstruct(tomo.simulate_counts(PSI2, 1e4, Stream(seed)))
            assert fidelity_pure(rho, PSI2) >= 0.99, seed

    def test_mixed_state_fidelity(self):
        mixed = 0.9 * _rho(PSI2) + 0.1 * np.eye(16) / 16
        rho = tomo.reconstruct(tomo.simulate_counts(mixed, 1e5, Stream(2)))
        assert fidelity_pure(rho, PSI2) == pytest.approx(0.90625, abs=0.01)

    def test_projection_idempotent_and_trace(self):
        for seed in range(5):
            rho = tomo.reconstruct(tomo.simulate_counts(PSI2, 200, Stream(seed))).matrix
            assert np.allclose(tomo.physical_projection(rho), rho, atol=1e-12)
            assert np.trace(rho).real == pytest.approx(1, abs=1e-10)

    def test_error_decreases_with_counts(self):
        target = _rho(PSI2)
        errs = []
        for n_set in (1e3, 1e4, 1e5):
            e = [np.linalg.norm(tomo.reconstruct(tomo.simulate_counts(PSI2, n_set, Stream(s))).matrix - target)
                 for s in range(20)]
            errs.append(np.mean(e))
        assert errs[0] > errs[1] > errs[2]

    def test_project_spectrum(self):
        assert tomo.project_spectrum(np.array([0.5, 0.5])) == pytest.approx([0.5, 0.5])
        p = tomo.project_spectrum(np.array([1.2, 0.1, -0.3]))
        assert p.sum() == pytest.approx(1) and p.min() >= 0
        assert p == pytest.approx([1.0, 0.0, 0.0])

    def test_missing_setting(self):
        ds = tomo.simulate_counts(PSI2, 100, Stream(0))
        counts = dict(ds.counts)
        del counts["XYZX"]
        with pytest.raises(ValueError):
            tomo.reconstruct(tomo.TomoDataset(4, 100, counts))

    def test_all_zero(self):
        ds = tomo.TomoDataset(1, 1, {s: np.zeros(2, np.int64) for s in "XYZ"})
        with pytest.raises(ValueError):
            tomo.reconstruct(ds)


class TestBootstrap:
    def test_degenerate_two_steps(self):
        ds = tomo.simulate_counts(PSI2, 1e3, Stream(0))
        res = tomo.bootstrap_spectra(ds, steps=2, seed=1)
        assert res.bootstrap_steps == 2
        assert len(res.spectra_mean) == 4 and all(np.isfinite(res.spectra_std))
        with pytest.raises(ValueError):
            tomo.bootstrap_spectra(ds, steps=1)

    def test_psi2_mean_near_half(self):
        # lambda_max at a degenerate marginal is biased upward by roughly 2.5-3 bootstrap
        # standard deviations, so "within 3 sigma" holds for the typical dataset, not all
        z = []
        for seed in range(10):
            res = tomo.bootstrap_spectra(tomo.simulate_counts(PSI2, 1e4, Stream(seed)), 1000, seed)
            z.extend((m - 0.5) / sd for m, sd in zip(res.spectra_mean, res.spectra_std))
        z = np.array(z)
        assert z.min() > 0
        assert z.max() < 4
        assert np.median(z) < 3

    def test_f_std_matches_propagation(self):
        ds = tomo.simulate_counts(canonical_state("PSI1"), 1e4, Stream(3))
        res = tomo.bootstrap_spectra(ds, steps=300, seed=4)
        s = np.array(res.spectra_std)
        propagated = math.sqrt(4 * s[0] ** 2 + (s[1:] ** 2).sum())
        assert propagated / 2 <= res.f_std <= 2 * propagated

    def test_reproducible(self):
        ds = tomo.simulate_counts(PSI2, 1e3, Stream(0))
        a = tomo.bootstrap_spectra(ds, 20, 7)
        b = tomo.bootstrap_spectra(ds, 20, 7)
        assert a.to_document() == b.to_document()
        # a different seed gives different resamples
        c = tomo.bootstrap_spectra(ds, 10, 7)
        d = tomo.bootstrap_spectra(ds, 10, 8)
        assert c.to_document() != d.to_document()

    def test_spectra_f(self):
        assert tomo.spectra_f((1, 0.5, 0.5, 0.5)) == 0.5
        assert tomo.spectra_f((0.5, 0.5, 0.5)) == pytest.approx(0.5)
        assert local_spectra(DensityMatrix(np.eye(4) / 4)) == pytest.approx((0.5, 0.5))


def test_dataset_file_round_trip(tmp_path):
    ds = tomo.simulate_counts(canonical_state("GHZ", 3), 100, Stream(0))
    path = tmp_path / "ds.json"
    tomo.save_dataset(ds, path)
    back = tomo.load_dataset(path)
    assert back.num_qubits == 3 and back.n_set == 100
    assert all(np.array_equal(back.counts[s], ds.counts[s]) for s in ds.counts)


@pytest.mark.parametrize("entry", [
    {"setting": "XQ", "counts": [1, 2, 3, 4]},
    {"setting": "XY", "counts": [1, 2, 3]},
    {"setting": "XY", "counts": [1, -2, 3, 4]},
])
def test_dataset_validation(entry):
    with pytest.raises(ValueError):
        tomo.TomoDataset.from_document({"num_qubits": 2, "n_set": 10, "settings": [entry]})
