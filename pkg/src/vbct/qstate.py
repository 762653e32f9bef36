"""Exact linear algebra for the small quantum systems used by the protocols.

States are dense numpy arrays in double precision. Dimensions never exceed
a few thousand, so nothing here tries to be clever about sparsity. The one
exception is :func:`sigma_mixtures`, whose result is kept as a distribution
over Hamming-weight classes so that batches of hundreds of qubits stay exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.stats import binom

from vbct.errors import ContractError, ParameterError

# Invariant checks on states built here.
TOL = 1e-12
# Looser tolerance for caller-supplied projector sets and property tests.
PROPERTY_TOL = 1e-10


def _qubit_dims(length: int) -> tuple[int, ...]:
    n = int(round(math.log2(length))) if length > 0 else 0
    if n < 1 or 2**n != length:
        raise ContractError(f"length {length} is not a power of two >= 2")
    return (2,) * n


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state; ``dims`` lists the local dimension of each subsystem.

    ``dims`` defaults to qubits, in which case the length must be a power of two.
    """

    amplitudes: np.ndarray
    dims: tuple[int, ...] | None = None

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(self.dims) if self.dims is not None else _qubit_dims(amps.size)
        if math.prod(dims) != amps.size or any(d < 2 for d in dims):
            raise ContractError(f"dims {dims} do not factor length {amps.size}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > TOL:
            raise ContractError(f"state not normalized (|psi|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", _freeze(amps))
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    def overlap(self, other: "StateVector") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"StateVector({np.array2string(self.amplitudes, precision=6)}, dims={self.dims})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple[int, ...] | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractError(f"density matrix must be square, got shape {m.shape}")
        dims = tuple(self.dims) if self.dims is not None else _qubit_dims(m.shape[0])
        if math.prod(dims) != m.shape[0]:
            raise ContractError(f"dims {dims} do not factor dimension {m.shape[0]}")
        if np.max(np.abs(m - m.conj().T)) > TOL:
            raise ContractError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TOL:
            raise ContractError(f"density matrix trace is {tr!r}, expected 1")
        if np.linalg.eigvalsh(m)[0] < -TOL:
            raise ContractError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", _freeze(m))
        object.__setattr__(self, "dims", dims)

    @classmethod
    def diagonal(cls, probs: Sequence[float], dims: tuple[int, ...] | None = None) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probs, dtype=float)), dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_diagonal(self) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off)) <= TOL)

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"


@dataclass(frozen=True)
class BiasParams:
    """Bias parameters for all protocol variants.

    For VBCT1 only ``theta`` is set, and ``p_min``/``p_max`` follow from it.
    For the pair-state protocols ``alpha0_sq`` is the outcome-0 weight of the
    state Bob uses to push towards 0 (``p_max``) and ``alpha1_sq`` the other
    (``p_min``).
    """

    theta: float | None = None
    alpha0_sq: float | None = None
    alpha1_sq: float | None = None
    p_min: float = field(init=False)
    p_max: float = field(init=False)

    def __post_init__(self):
        if self.theta is not None:
            if not 0.0 <= self.theta <= math.pi / 2:
                raise ParameterError(f"theta={self.theta!r} outside [0, pi/2]")
            s = math.sin(self.theta)
            p_min, p_max = 0.5 * (1 - s), 0.5 * (1 + s)
        elif self.alpha0_sq is not None and self.alpha1_sq is not None:
            for name in ("alpha0_sq", "alpha1_sq"):
                v = getattr(self, name)
                if not 0.0 <= v <= 1.0:
                    raise ParameterError(f"{name}={v!r} outside [0, 1]")
            if not self.alpha0_sq > self.alpha1_sq:
                raise ParameterError("alpha0_sq must exceed alpha1_sq")
            p_min, p_max = self.alpha1_sq, self.alpha0_sq
        else:
            raise ParameterError("give either theta or both alpha0_sq and alpha1_sq")
        object.__setattr__(self, "p_min", p_min)
        object.__setattr__(self, "p_max", p_max)

    @classmethod
    def from_theta(cls, theta: float) -> "BiasParams":
        return cls(theta=theta)

    @classmethod
    def from_alphas(cls, alpha0_sq: float, alpha1_sq: float) -> "BiasParams":
        return cls(alpha0_sq=alpha0_sq, alpha1_sq=alpha1_sq)

    def bias_for(self, label: int) -> float:
        """Outcome-0 probability when Bob pushes with input ``label``."""
        return self.p_max if label == 0 else self.p_min


# --------------------------------------------------------------------------
# state constructors
# --------------------------------------------------------------------------

def make_vbct1_state(theta: float, label: int) -> StateVector:
    """cos(theta/2)|0> + (-1)^label sin(theta/2)|1>."""
    if not 0.0 <= theta <= math.pi / 2:
        raise ParameterError(f"theta={theta!r} outside [0, pi/2]")
    if label not in (0, 1):
        raise ParameterError(f"label must be 0 or 1, got {label!r}")
    sign = -1.0 if label else 1.0
    return StateVector([math.cos(theta / 2), sign * math.sin(theta / 2)])


def make_pair_state(alpha_sq: float) -> StateVector:
    """sqrt(alpha_sq)|00> + sqrt(1 - alpha_sq)|11>."""
    if not 0.0 <= alpha_sq <= 1.0:
        raise ParameterError(f"alpha_sq={alpha_sq!r} outside [0, 1]")
    return StateVector([math.sqrt(alpha_sq), 0.0, 0.0, math.sqrt(1.0 - alpha_sq)])


def make_correlated_state(probs: Sequence[float]) -> StateVector:
    """sum_j sqrt(probs[j]) |jj> on two d-level systems (d = len(probs))."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ParameterError("need a probability vector with at least two entries")
    if np.any(p < 0) or abs(p.sum() - 1.0) > PROPERTY_TOL:
        raise ParameterError(f"not a probability vector: {p.tolist()}")
    d = p.size
    amps = np.zeros(d * d)
    amps[np.arange(d) * (d + 1)] = np.sqrt(p / p.sum())
    return StateVector(amps, (d, d))


def basis_state(index: int, dims: tuple[int, ...] = (2,)) -> StateVector:
    amps = np.zeros(math.prod(dims))
    amps[index] = 1.0
    return StateVector(amps, dims)


PLUS = StateVector(np.array([1.0, 1.0]) / math.sqrt(2))
MINUS = StateVector(np.array([1.0, -1.0]) / math.sqrt(2))


def rotated_basis(angle: float) -> tuple[StateVector, StateVector]:
    """Orthonormal qubit basis at Bloch angle ``angle`` in the x-z plane.

    ``angle = 0`` is the computational basis and ``angle = pi/2`` gives
    ``(|+>, |->)``.
    """
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return StateVector([c, s]), StateVector([s, -c])


def projector(state: StateVector) -> np.ndarray:
    return np.outer(state.amplitudes, state.amplitudes.conj())


def basis_projectors(states: Sequence[StateVector]) -> list[np.ndarray]:
    return [projector(s) for s in states]


def computational_projectors(dim: int) -> list[np.ndarray]:
    out = []
    for k in range(dim):
        p = np.zeros((dim, dim), dtype=complex)
        p[k, k] = 1.0
        out.append(p)
    return out


# --------------------------------------------------------------------------
# measurement and reduced states
# --------------------------------------------------------------------------

def born_index(probs: Sequence[float], randomness: float) -> int:
    """Inverse-CDF choice of an outcome; zero-weight outcomes are never returned."""
    if not 0.0 <= randomness < 1.0:
        raise ContractError(f"randomness {randomness!r} outside [0, 1)")
    total = 0.0
    last = -1
    for k, p in enumerate(probs):
        if p <= 0.0:
            continue
        total += p
        last = k
        if randomness < total:
            return k
    if last < 0:
        raise ContractError("no outcome has positive probability")
    # rounding left the cumulative sum a hair below 1
    return last


def _as_density(state: Union[StateVector, DensityMatrix]) -> DensityMatrix:
    return state.density() if isinstance(state, StateVector) else state


def measure_projective(
    state: Union[StateVector, DensityMatrix],
    basis: Sequence[np.ndarray],
    randomness: float,
) -> tuple[int, DensityMatrix]:
    """Projective measurement with outcome drawn by inverse CDF over Born weights.

    Returns the outcome index and the normalized post-measurement state.
    """
    rho = _as_density(state)
    projs = [np.asarray(p, dtype=complex) for p in basis]
    if not projs or any(p.shape != rho.matrix.shape for p in projs):
        raise ContractError("projector shapes do not match the state")
    if np.max(np.abs(sum(projs) - np.eye(rho.dim))) > PROPERTY_TOL:
        raise ContractError("projectors do not sum to the identity")
    probs = [max(float(np.trace(p @ rho.matrix).real), 0.0) for p in projs]
    k = born_index(probs, randomness)
    post = projs[k] @ rho.matrix @ projs[k]
    post = post / np.trace(post).real
    post = 0.5 * (post + post.conj().T)
    return k, DensityMatrix(post, rho.dims)


def partial_trace(
    state: Union[StateVector, DensityMatrix],
    discard: int,
    dims: tuple[int, ...] | None = None,
) -> DensityMatrix:
    """Trace out subsystem ``discard`` (an index into ``dims``)."""
    rho = _as_density(state)
    dims = tuple(dims) if dims is not None else rho.dims
    if math.prod(dims) != rho.dim or len(dims) < 2:
        raise ContractError(f"dims {dims} do not factor dimension {rho.dim} into subsystems")
    if not 0 <= discard < len(dims):
        raise ContractError(f"no subsystem {discard} in dims {dims}")
    n = len(dims)
    t = rho.matrix.reshape(dims + dims)
    t = np.trace(t, axis1=discard, axis2=discard + n)
    kept = dims[:discard] + dims[discard + 1:]
    d = math.prod(kept)
    m = t.reshape(d, d)
    return DensityMatrix(0.5 * (m + m.conj().T), kept)


# --------------------------------------------------------------------------
# distinguishability
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExchangeableDiagonalState:
    """Diagonal n-qubit state whose entries depend only on Hamming weight.

    ``masses[w]`` is the total probability of all basis strings of weight w;
    each such string carries ``masses[w] / C(n, w)``.
    """

    n_qubits: int
    masses: np.ndarray

    def __post_init__(self):
        m = np.array(self.masses, dtype=float)
        if m.shape != (self.n_qubits + 1,):
            raise ContractError("need one mass per Hamming weight 0..n")
        if m.min() < -TOL or abs(m.sum() - 1.0) > 1e-9:
            raise ContractError("masses do not form a probability distribution")
        object.__setattr__(self, "masses", _freeze(m))

    def diagonal(self) -> np.ndarray:
        n = self.n_qubits
        weights = np.array([bin(i).count("1") for i in range(2**n)])
        sizes = np.array([math.comb(n, w) for w in range(n + 1)], dtype=float)
        return (self.masses / sizes)[weights]

    def to_density(self) -> DensityMatrix:
        if self.n_qubits > 12:
            raise ContractError("refusing to expand more than 12 qubits densely")
        return DensityMatrix(np.diag(self.diagonal()))


DistinguishableState = Union[StateVector, DensityMatrix, ExchangeableDiagonalState]


def _dense(state: DistinguishableState) -> DensityMatrix:
    if isinstance(state, ExchangeableDiagonalState):
        return state.to_density()
    return _as_density(state)


def trace_distance(a: DistinguishableState, b: DistinguishableState) -> float:
    """D(a, b) = 1/2 sum |eigenvalues of a - b|."""
    if isinstance(a, ExchangeableDiagonalState) and isinstance(b, ExchangeableDiagonalState):
        if a.n_qubits != b.n_qubits:
            raise ContractError("states act on different numbers of qubits")
        return float(0.5 * np.abs(a.masses - b.masses).sum())
    a, b = _dense(a), _dense(b)
    if a.dim != b.dim:
        raise ContractError(f"dimension mismatch: {a.dim} vs {b.dim}")
    ev = np.linalg.eigvalsh(a.matrix - b.matrix)
    return float(min(0.5 * np.abs(ev).sum(), 1.0))


def helstrom_success(a: DistinguishableState, b: DistinguishableState, prior: float = 0.5) -> float:
    """Optimal probability of telling ``a`` (prior ``prior``) from ``b``."""
    if not 0.0 <= prior <= 1.0:
        raise ParameterError(f"prior={prior!r} outside [0, 1]")
    if prior == 0.5:
        return 0.5 * (1.0 + trace_distance(a, b))
    if isinstance(a, ExchangeableDiagonalState) and isinstance(b, ExchangeableDiagonalState):
        if a.n_qubits != b.n_qubits:
            raise ContractError("states act on different numbers of qubits")
        norm = np.abs(prior * a.masses - (1 - prior) * b.masses).sum()
        return float(0.5 * (1.0 + norm))
    a, b = _dense(a), _dense(b)
    if a.dim != b.dim:
        raise ContractError(f"dimension mismatch: {a.dim} vs {b.dim}")
    ev = np.linalg.eigvalsh(prior * a.matrix - (1 - prior) * b.matrix)
    return float(0.5 * (1.0 + np.abs(ev).sum()))


def product_trace_distance(
    rho_a: DensityMatrix,
    sigma_a: ExchangeableDiagonalState,
    rho_b: DensityMatrix,
    sigma_b: ExchangeableDiagonalState,
) -> float:
    """D(rho_a (x) sigma_a, rho_b (x) sigma_b) for diagonal single-qubit ``rho``."""
    if not (rho_a.is_diagonal() and rho_b.is_diagonal()):
        raise ContractError("leading factors must be diagonal")
    if sigma_a.n_qubits != sigma_b.n_qubits or rho_a.dim != rho_b.dim:
        raise ContractError("dimension mismatch")
    da = np.diag(rho_a.matrix).real
    db = np.diag(rho_b.matrix).real
    diff = np.outer(da, sigma_a.masses) - np.outer(db, sigma_b.masses)
    return float(0.5 * np.abs(diff).sum())


def pass_probability(p: float, delta: float) -> float:
    """Largest test-pass probability for a state whose outcome-0 weight is p + delta.

    The honest state has outcome-0 weight ``p``; the best substitute is
    sqrt(p+delta)|0'> + sqrt(1-p-delta)|1'> in the relevant basis.
    """
    q = p + delta
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p={p!r} outside [0, 1]")
    if not -TOL <= q <= 1.0 + TOL:
        raise ParameterError(f"p + delta = {q!r} outside [0, 1]")
    q = min(max(q, 0.0), 1.0)
    return (math.sqrt(p * q) + math.sqrt((1.0 - p) * (1.0 - q))) ** 2


def pair_reduced_state(alpha_sq: float) -> DensityMatrix:
    """Either half of sqrt(a)|00> + sqrt(1-a)|11>: diag(a, 1-a)."""
    return partial_trace(make_pair_state(alpha_sq), 1)


def sigma_mixtures(N: int, alpha0_sq: float, alpha1_sq: float, selected_label: int) -> ExchangeableDiagonalState:
    """Alice's state of the other N-1 halves once Bob has picked a ``selected_label`` pair.

    Every label sequence of the remaining halves is weighted equally, except
    the one that would make the whole batch uniform (such batches are
    rejected): all-rho0 is excluded when ``selected_label`` is 0 and all-rho1
    when it is 1. Summing the product states over all sequences gives
    ((rho0 + rho1))^{(x) n}; subtracting the excluded term leaves a state
    that is diagonal and depends only on Hamming weight, so

        mass(w) = [Bin(n, qbar)(w) - 2^-n Bin(n, q_excl)(w)] / (1 - 2^-n)

    where q = 1 - alpha^2 is the |1> weight and qbar the mean of q0 and q1.
    """
    if N < 2:
        raise ParameterError(f"N={N!r} must be at least 2")
    if selected_label not in (0, 1):
        raise ParameterError("selected_label must be 0 or 1")
    for v in (alpha0_sq, alpha1_sq):
        if not 0.0 <= v <= 1.0:
            raise ParameterError(f"alpha^2={v!r} outside [0, 1]")
    n = N - 1
    q0, q1 = 1.0 - alpha0_sq, 1.0 - alpha1_sq
    w = np.arange(n + 1)
    all_sequences = binom.pmf(w, n, 0.5 * (q0 + q1))
    excluded = binom.pmf(w, n, q0 if selected_label == 0 else q1)
    scale = 2.0 ** (-n)
    masses = (all_sequences - scale * excluded) / (1.0 - scale)
    masses = np.clip(masses, 0.0, None)
    return ExchangeableDiagonalState(n, masses / masses.sum())
