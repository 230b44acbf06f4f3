"""Haar-random states and polytope occupation statistics.

Sharding rule: a run of ``N`` samples with ``S`` shards gives shard ``i``
``N // S`` samples (plus one for ``i < N % S``) drawn from stream ``i`` of
the master seed. Tallies merge by addition, so the result is independent of
execution order and worker count.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from entpoly import polytope
from entpoly.prng import Stream
from entpoly.qcore import ANNIHILATION_THRESHOLD, StateVector, local_spectra_batch, MAX_QUBITS

CHUNK = 20_000
FACET_TOL = 1e-12
FAMILIES = ("P1", "P2", "P3", "P6")


def haar_states(num_qubits: int, count: int, stream: Stream) -> np.ndarray:
    """``count`` Haar-random amplitude vectors as rows, normalized."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}]")
    z = stream.complex_normal((count, 2**num_qubits))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_state(num_qubits: int, stream: Stream) -> StateVector:
    return StateVector(num_qubits, haar_states(num_qubits, 1, stream)[0])


@lru_cache(maxsize=None)
def _membership_systems(num_qubits: int):
    systems = {}
    for p in polytope.catalog(4 if num_qubits == 4 else 3):
        key = str(p.id)
        if key in ("P4", "P7", "GHZ3", "W3"):
            systems[key] = polytope.facets(key)
        else:
            systems[key] = polytope.derived_facets(key)
    return systems


def membership(spectra: np.ndarray, num_qubits: int) -> dict[str, np.ndarray]:
    """Boolean membership masks for every catalog polytope, keyed by id."""
    return {k: s.satisfied(spectra, FACET_TOL) for k, s in _membership_systems(num_qubits).items()}


@dataclass(frozen=True)
class SampleTally:
    num_qubits: int
    num_samples: int
    counts: dict
    unions: dict
    seed: object = None
    shards: tuple = field(default=())

    @classmethod
    def empty(cls, num_qubits: int) -> "SampleTally":
        keys = [str(p.id) for p in polytope.catalog(4 if num_qubits == 4 else 3)]
        unions = {f: 0 for f in FAMILIES} if num_qubits == 4 else {}
        return cls(num_qubits, 0, {k: 0 for k in keys}, unions)

    def fraction(self, key: str) -> float:
        count = self.unions[key] if key in self.unions else self.counts[key]
        return count / self.num_samples

    def stderr(self, key: str) -> float:
        p = self.fraction(key)
        return float(np.sqrt(p * (1 - p) / self.num_samples))


def tally_merge(a: SampleTally, b: SampleTally) -> SampleTally:
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"cannot merge {a.num_qubits}-qubit and {b.num_qubits}-qubit tallies")
    if b.num_samples == 0 and not b.shards:
        return a
    if a.num_samples == 0 and not a.shards:
        return b
    seed = a.seed if a.seed == b.seed else (a.seed, b.seed)
    return SampleTally(
        a.num_qubits,
        a.num_samples + b.num_samples,
        {k: a.counts[k] + b.counts[k] for k in a.counts},
        {k: a.unions[k] + b.unions[k] for k in a.unions},
        seed,
        a.shards + b.shards,
    )


def _check_qubits(num_qubits):
    if num_qubits not in (3, 4):
        raise ValueError(f"volume statistics are defined for 3 or 4 qubits, got {num_qubits}")


def run_shard(num_qubits: int, num_samples: int, seed: int, stream_id: int) -> SampleTally:
    """Tally ``num_samples`` states drawn from one stream."""
    _check_qubits(num_qubits)
    stream = Stream(seed, stream_id)
    tally = SampleTally.empty(num_qubits)
    counts = dict(tally.counts)
    unions = dict(tally.unions)
    done = 0
    while done < num_samples:
        size = min(CHUNK, num_samples - done)
        spectra = local_spectra_batch(haar_states(num_qubits, size, stream))
        masks = membership(spectra, num_qubits)
        for key, mask in masks.items():
            counts[key] += int(mask.sum())
        for fam in unions:
            hit = np.zeros(size, dtype=bool)
            for key, mask in masks.items():
                if key[:2] == fam:
                    hit |= mask
            unions[fam] += int(hit.sum())
        done += size
    return SampleTally(num_qubits, num_samples, counts, unions, seed, ((seed, stream_id, num_samples),))


def shard_sizes(num_samples: int, shards: int) -> list[int]:
    base, extra = divmod(num_samples, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def volume_estimate(num_qubits: int, num_samples: int, seed: int = 0, shards: int = 1,
                    workers: int = 1) -> SampleTally:
    """Fraction of Haar-random states whose local spectra fall in each catalog polytope."""
    _check_qubits(num_qubits)
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    if shards < 1:
        raise ValueError("shards must be at least 1")
    jobs = [(num_qubits, n, seed, i) for i, n in enumerate(shard_sizes(num_samples, shards))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_shard, *zip(*jobs)))
    else:
        parts = [run_shard(*job) for job in jobs]
    total = SampleTally.empty(num_qubits)
    for part in parts:
        total = tally_merge(total, part)
    return total


def postmeasure_spectra(num_samples: int, seed: int = 0, stream_id: int = 0) -> np.ndarray:
    """Three-qubit spectra left after measuring qubit 1 of Haar four-qubit states and keeping outcome 0.

    Branches with probability below the annihilation threshold are redrawn.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    stream = Stream(seed, stream_id)
    kept = []
    have = 0
    while have < num_samples:
        size = min(CHUNK, num_samples - have)
        branch = haar_states(4, size, stream)[:, :8]
        prob = np.einsum("ij,ij->i", branch, branch.conj()).real
        branch = branch[prob >= ANNIHILATION_THRESHOLD]
        prob = prob[prob >= ANNIHILATION_THRESHOLD]
        kept.append(local_spectra_batch(branch / np.sqrt(prob)[:, None]))
        have += branch.shape[0]
    return np.concatenate(kept)[:num_samples]


def postmeasure_experiment(num_samples: int, seed: int = 0) -> float:
    """Fraction of post-selected residual states whose spectra leave the W polytope."""
    spectra = postmeasure_spectra(num_samples, seed)
    inside = polytope.facets("W3").satisfied(spectra, FACET_TOL)
    return float(1.0 - inside.mean())
