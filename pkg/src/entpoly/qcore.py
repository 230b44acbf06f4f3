"""Dense pure-state algebra for small qubit registers.

Qubit ``j`` (1-based) is the ``j``-th most significant bit of the amplitude
index, so ``|HHHV>`` is index ``0b0001``. ``|H> = |0>`` and ``|V> = |1>``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

MAX_QUBITS = 12
ANNIHILATION_THRESHOLD = 1e-14


class AnnihilationError(ArithmeticError):
    """An operation left (numerically) nothing of the state."""


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}")
        if amps.size != 2**self.num_qubits:
            raise ValueError(f"expected {2**self.num_qubits} amplitudes, got {amps.size}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Iterable[complex]) -> "StateVector":
        """Build a normalized state; the register size is inferred from the length."""
        amps = np.asarray(list(amplitudes) if not isinstance(amplitudes, np.ndarray) else amplitudes,
                          dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size))) if amps.size else 0
        if amps.size == 0 or 2**n != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of two")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if norm2 < ANNIHILATION_THRESHOLD:
            raise ValueError("cannot normalize a zero vector")
        return cls(n, amps / np.sqrt(norm2))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.num_qubits == other.num_qubits and np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash((self.num_qubits, self.amplitudes.tobytes()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if not np.allclose(m, m.conj().T, atol=1e-10, rtol=0):
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace {np.trace(m).real!r} != 1")
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise ValueError("density matrix has negative eigenvalues")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return int(round(np.log2(self.dim)))

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        a = state.amplitudes
        return cls(np.outer(a, a.conj()))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def _check_qubit(n: int, qubit: int) -> int:
    if not isinstance(qubit, (int, np.integer)) or not 1 <= qubit <= n:
        raise ValueError(f"qubit index {qubit!r} outside [1, {n}]")
    return int(qubit) - 1


def _check_size(n) -> int:
    if n is None or not 1 <= int(n) <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n!r}")
    return int(n)


def canonical_state(name: str, n: int | None = None, index: int | None = None) -> StateVector:
    """Return a named state.

    Names (case-insensitive): ``PSI1``, ``PSI2``, ``GHZ`` (needs ``n``),
    ``W`` (needs ``n``), ``EPR`` and ``BASIS`` (needs ``n`` and ``index``).
    ``PSI1`` is sqrt(3)/3 (|HHHH> + |VVVV>) + sqrt(3)/6 (|HV>+|VH>)(|HV>+|VH>)
    and ``PSI2`` the four-qubit GHZ state.
    """
    key = name.upper().replace("_N", "")
    if key == "PSI1":
        amps = np.zeros(16, dtype=complex)
        amps[0b0000] = amps[0b1111] = np.sqrt(3) / 3
        for i in (0b0101, 0b0110, 0b1001, 0b1010):
            amps[i] = np.sqrt(3) / 6
        return StateVector.from_amplitudes(amps)
    if key == "PSI2":
        key, n = "GHZ", 4
    if key == "EPR":
        key, n = "GHZ", 2
    if key == "GHZ":
        n = _check_size(n)
        amps = np.zeros(2**n, dtype=complex)
        amps[0] = amps[-1] = 1.0
        return StateVector.from_amplitudes(amps)
    if key == "W":
        n = _check_size(n)
        amps = np.zeros(2**n, dtype=complex)
        amps[[1 << k for k in range(n)]] = 1.0
        return StateVector.from_amplitudes(amps)
    if key == "BASIS":
        n = _check_size(n)
        if index is None or not 0 <= int(index) < 2**n:
            raise ValueError(f"basis index {index!r} outside [0, {2**n})")
        amps = np.zeros(2**n, dtype=complex)
        amps[int(index)] = 1.0
        return StateVector(n, amps)
    raise ValueError(f"unknown canonical state {name!r}")


def as_local_operator(op) -> np.ndarray:
    m = np.asarray(op, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"local operator must be 2x2, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("local operator entries must be finite")
    return m


def _apply_unnormalized(amps: np.ndarray, n: int, ops: Sequence[tuple[int, np.ndarray]]) -> np.ndarray:
    seen = set()
    t = amps.reshape((2,) * n)
    for qubit, op in ops:
        axis = _check_qubit(n, qubit)
        if axis in seen:
            raise ValueError(f"qubit {qubit} appears twice in the operator list")
        seen.add(axis)
        t = np.moveaxis(np.tensordot(as_local_operator(op), t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def apply_local(state: StateVector, ops: Sequence[tuple[int, object]]) -> tuple[StateVector, float]:
    """Apply single-qubit operators to distinct qubits and renormalize.

    Returns the new state and the success weight ``|M psi|^2 / |psi|^2``.
    Operators are applied as given, so a contraction yields a weight in
    [0, 1] while an operator with singular values above one may yield more.
    """
    out = _apply_unnormalized(state.amplitudes, state.num_qubits, ops)
    weight = float(np.vdot(out, out).real) / float(np.vdot(state.amplitudes, state.amplitudes).real)
    if weight < ANNIHILATION_THRESHOLD:
        raise AnnihilationError(f"local operators annihilate the state (weight {weight:.3e})")
    return StateVector(state.num_qubits, out / np.sqrt(np.vdot(out, out).real)), weight


def postselect(state: StateVector, qubit: int, outcome: int) -> tuple[StateVector, float]:
    """Measure ``qubit`` in the computational basis and keep ``outcome``.

    The remaining qubits keep their relative order.
    """
    n = state.num_qubits
    if n < 2:
        raise ValueError("post-selection needs at least two qubits")
    axis = _check_qubit(n, qubit)
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    branch = np.take(state.tensor(), outcome, axis=axis).reshape(-1)
    prob = float(np.vdot(branch, branch).real)
    if prob < ANNIHILATION_THRESHOLD:
        raise AnnihilationError(f"outcome {outcome} on qubit {qubit} has probability {prob:.3e}")
    return StateVector(n - 1, branch / np.sqrt(prob)), prob


def _single_marginal(tensor: np.ndarray, axis: int) -> np.ndarray:
    m = np.moveaxis(tensor, axis, 0).reshape(2, -1)
    return m @ m.conj().T


def reduced_density(state: Union[StateVector, DensityMatrix], qubit: int) -> DensityMatrix:
    """Single-qubit marginal of a pure state or of an n-qubit density matrix."""
    if isinstance(state, DensityMatrix):
        n = state.num_qubits
        axis = _check_qubit(n, qubit)
        t = state.matrix.reshape((2,) * (2 * n))
        others = [k for k in range(n) if k != axis]
        # trace out every other qubit pairwise (row axis k with column axis n+k)
        t = np.transpose(t, [axis] + others + [n + axis] + [n + k for k in others])
        t = t.reshape(2, 2 ** (n - 1), 2, 2 ** (n - 1))
        rho = np.einsum("aibi->ab", t)
    else:
        rho = _single_marginal(state.tensor(), _check_qubit(state.num_qubits, qubit))
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def max_eigenvalue_2x2(r00, r11, r01):
    """Larger eigenvalue of a unit-trace 2x2 Hermitian matrix; works elementwise on arrays."""
    return 0.5 + np.sqrt((r00 - r11) ** 2 / 4.0 + np.abs(r01) ** 2)


def local_spectra(state: Union[StateVector, DensityMatrix]) -> tuple[float, ...]:
    """Vector of per-qubit maximal marginal eigenvalues, each in [1/2, 1]."""
    out = []
    for q in range(1, state.num_qubits + 1):
        rho = reduced_density(state, q).matrix
        out.append(float(max_eigenvalue_2x2(rho[0, 0].real, rho[1, 1].real, rho[0, 1])))
    return tuple(out)


def local_spectra_batch(amplitudes: np.ndarray) -> np.ndarray:
    """Local spectra for a stack of normalized states, shape ``(N, 2**n) -> (N, n)``."""
    amps = np.asarray(amplitudes)
    count, dim = amps.shape
    n = int(round(np.log2(dim)))
    t = amps.reshape((count,) + (2,) * n)
    out = np.empty((count, n))
    for q in range(n):
        m = np.moveaxis(t, q + 1, 1).reshape(count, 2, -1)
        m0, m1 = m[:, 0], m[:, 1]
        r00 = np.einsum("ij,ij->i", m0, m0.conj()).real
        r11 = np.einsum("ij,ij->i", m1, m1.conj()).real
        r01 = np.einsum("ij,ij->i", m0, m1.conj())
        tr = r00 + r11
        out[:, q] = max_eigenvalue_2x2(r00 / tr, r11 / tr, r01 / tr)
    return out


def schmidt_coefficients(state: StateVector) -> tuple[float, float]:
    if state.num_qubits != 2:
        raise ValueError("Schmidt coefficients are defined here for two qubits only")
    s = np.linalg.svd(state.amplitudes.reshape(2, 2), compute_uv=False)
    return float(s[0]), float(s[1])


def fidelity_pure(rho: DensityMatrix, target: StateVector) -> float:
    """<target| rho |target>."""
    if rho.dim != target.amplitudes.size:
        raise ValueError(f"dimension mismatch: rho is {rho.dim}, target is {target.amplitudes.size}")
    a = target.amplitudes
    return float(np.vdot(a, rho.matrix @ a).real)


def state_to_document(state: StateVector) -> dict:
    return {
        "num_qubits": state.num_qubits,
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }


def state_from_document(doc: dict) -> StateVector:
    try:
        n = int(doc["num_qubits"])
        pairs = doc["amplitudes"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed state document: {exc}") from None
    n = _check_size(n)
    if len(pairs) != 2**n:
        raise ValueError(f"state document lists {len(pairs)} amplitudes, expected {2**n}")
    try:
        amps = [complex(float(re), float(im)) for re, im in pairs]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"malformed amplitude entry: {exc}") from None
    return StateVector.from_amplitudes(amps)


def load_state(path) -> StateVector:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not a valid state document ({exc})") from None
    return state_from_document(doc)


def dump_state(state: StateVector, path) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_document(state), fh, indent=2)
        fh.write("\n")
