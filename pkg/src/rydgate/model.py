"""Physical model of the driven Rydberg register.

Builds every operator the gate scheme needs from physical parameters:
the time-dependent interaction-picture Hamiltonian of the full register,
its interaction-rotated form (all pair-interaction energies absorbed into
oscillating phases), the truncated sector Hamiltonians, the static
effective gate Hamiltonian, spontaneous-emission jump operators, pairwise
interaction strengths from geometry, and the ideal target gate.

Unit convention: all frequencies and rates are angular and carried in
rad/us, times in us.  ``2*pi`` rad/us therefore corresponds to an ordinary
frequency of 1 MHz.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .spaces import (
    LEAKAGE_LEVEL,
    RYDBERG_LEVEL,
    HilbertSpace,
    transition_op,
)

__all__ = [
    "DriveParams",
    "InteractionGraph",
    "Geometry",
    "DecayModel",
    "SystemModel",
    "HamiltonianTerms",
    "u_from_distance",
    "interactions_from_geometry",
    "rri_diagonal",
    "full_hamiltonian_terms",
    "hamiltonian_full",
    "rotated_hamiltonian_terms",
    "hamiltonian_rotated",
    "interaction_frame_phases",
    "block_hamiltonian_terms",
    "hamiltonian_block",
    "hamiltonian_effective",
    "jump_operators",
    "control_drive_phase",
    "drive_phase_compensation",
    "ideal_gate",
]


@dataclass(frozen=True)
class DriveParams:
    """Drive amplitudes and detuning.

    Control atoms (all but the last) are driven off-resonantly on
    |0> <-> |r> with blue detuning ``delta``; the target atom (the last
    one) is driven resonantly on both |0> <-> |r> and |1> <-> |r>.

    Parameters
    ----------
    omega_prime : float
        Rabi frequency of control atom 0 (rad/us), > 0.
    omega1, omega2 : float
        Target-atom Rabi frequencies (rad/us), signed reals.  The one-step
        gate uses omega2 = -omega1.
    delta : float
        Blue detuning of the control drives (rad/us), > 0.
    omega_dprime : float, optional
        Rabi frequency of control atom 1; defaults to ``omega_prime``.
    omega_ctrl3 : float, optional
        Rabi frequency of control atom 2 in the four-atom register;
        defaults to ``omega_prime``.
    """

    omega_prime: float
    omega1: float
    omega2: float
    delta: float
    omega_dprime: float | None = None
    omega_ctrl3: float | None = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.omega_prime <= 0:
            raise ValueError("omega_prime must be positive")
        if self.omega_dprime is None:
            object.__setattr__(self, "omega_dprime", self.omega_prime)
        if self.omega_ctrl3 is None:
            object.__setattr__(self, "omega_ctrl3", self.omega_prime)
        if not self.separation_ok:
            warnings.warn(
                "drive hierarchy delta >> omega_prime >> omega1,omega2 is weak; "
                "the one-step gate approximation degrades",
                stacklevel=2,
            )

    @property
    def separation_ok(self) -> bool:
        """Whether the scale hierarchy behind the one-step gate holds."""
        weak = max(abs(self.omega1), abs(self.omega2))
        if weak == 0.0:
            return self.delta / self.omega_prime >= 10.0
        return (self.delta / self.omega_prime >= 10.0) and (self.omega_prime / weak >= 5.0)

    def control_amplitudes(self, n_atoms: int) -> tuple[float, ...]:
        """Rabi frequency of each control atom, in atom order."""
        amps = (self.omega_prime, self.omega_dprime, self.omega_ctrl3)
        return amps[: n_atoms - 1]


@dataclass(frozen=True)
class InteractionGraph:
    """Symmetric matrix of pairwise Rydberg-Rydberg interaction strengths."""

    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("interaction matrix must be square")
        if not np.allclose(u, u.T):
            raise ValueError("interaction matrix must be symmetric")
        if np.any(np.diag(u) != 0.0):
            raise ValueError("interaction matrix must have zero diagonal")
        if np.any(u < 0.0):
            raise ValueError("interaction strengths must be non-negative")
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "u", u)

    @property
    def n_atoms(self) -> int:
        return self.u.shape[0]

    @classmethod
    def from_pairs(cls, n_atoms: int, pairs: dict) -> "InteractionGraph":
        """Build from a ``{(j, k): strength}`` mapping (0-based, j < k)."""
        u = np.zeros((n_atoms, n_atoms))
        for (j, k), val in pairs.items():
            u[j, k] = u[k, j] = val
        return cls(u=u)


@dataclass(frozen=True)
class Geometry:
    """Atom positions and van der Waals coefficient.

    ``c6`` is the angular coefficient in rad/us * um^6; positions are 2-D
    coordinates in um.
    """

    c6: float
    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must be an (n_atoms, 2) array")
        pos = pos.copy()
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)


def u_from_distance(c6: float, r: float) -> float:
    """Van der Waals interaction strength ``c6 / r**6``."""
    if r <= 0:
        raise ValueError("distance must be positive")
    return c6 / r**6


def interactions_from_geometry(geom: Geometry) -> InteractionGraph:
    """Pairwise interaction strengths from atom positions."""
    pos = geom.positions
    n = pos.shape[0]
    u = np.zeros((n, n))
    for j in range(n):
        for k in range(j + 1, n):
            r = float(np.linalg.norm(pos[j] - pos[k]))
            if r == 0.0:
                raise ValueError(f"atoms {j} and {k} are coincident")
            u[j, k] = u[k, j] = u_from_distance(geom.c6, r)
    return InteractionGraph(u=u)


@dataclass(frozen=True)
class DecayModel:
    """Spontaneous emission from |r> with total rate ``gamma``.

    ``channels`` selects the branching:

    * ``"two"``   -- |r> -> |0> and |r> -> |1>, gamma/2 each.
    * ``"three"`` -- additionally |r> -> |d>; with ``conserve_total_rate``
      each branch gets gamma/3 (the total stays gamma), otherwise each
      branch keeps gamma/2 (the total grows to 3*gamma/2).
    """

    gamma: float
    channels: str = "two"
    conserve_total_rate: bool = True

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.channels not in ("two", "three"):
            raise ValueError("channels must be 'two' or 'three'")

    def branch_rates(self) -> tuple[tuple[float, int], ...]:
        """Per-channel ``(rate, destination level)`` for one atom."""
        if self.channels == "two":
            return ((self.gamma / 2.0, 0), (self.gamma / 2.0, 1))
        each = self.gamma / 3.0 if self.conserve_total_rate else self.gamma / 2.0
        return ((each, 0), (each, 1), (each, LEAKAGE_LEVEL))


@dataclass(frozen=True)
class SystemModel:
    """Aggregate of space, drives, interactions and (optional) decay."""

    space: HilbertSpace
    drives: DriveParams
    interactions: InteractionGraph
    decay: DecayModel | None = None

    def __post_init__(self):
        if self.interactions.n_atoms != self.space.n_atoms:
            raise ValueError("interaction matrix size does not match atom count")


@dataclass(frozen=True)
class HamiltonianTerms:
    """Hamiltonian split as ``H(t) = static + sum_k (e^{i w_k t} M_k + h.c.)``.

    ``static`` is Hermitian; each oscillating matrix ``M_k`` is one-sided
    (its Hermitian conjugate is implied with the conjugate phase).
    """

    static: np.ndarray
    oscillating: tuple[tuple[float, np.ndarray], ...] = ()

    def __post_init__(self):
        static = np.asarray(self.static, dtype=complex)
        static.flags.writeable = False
        object.__setattr__(self, "static", static)
        osc = []
        for rate, m in self.oscillating:
            m = np.asarray(m, dtype=complex)
            m.flags.writeable = False
            osc.append((float(rate), m))
        object.__setattr__(self, "oscillating", tuple(osc))

    @property
    def dim(self) -> int:
        return self.static.shape[0]

    @property
    def is_static(self) -> bool:
        return not self.oscillating

    @property
    def max_phase_rate(self) -> float:
        """Largest |w_k| among the oscillating terms (0 when static)."""
        return max((abs(rate) for rate, _ in self.oscillating), default=0.0)

    def spectral_bound(self) -> float:
        """Gershgorin-style upper bound on ||H(t)|| valid for all t."""
        mag = np.abs(self.static)
        for _, m in self.oscillating:
            mag = mag + np.abs(m) + np.abs(m).T
        return float(np.max(np.sum(mag, axis=1)))

    def __call__(self, t: float) -> np.ndarray:
        h = self.static.copy()
        for rate, m in self.oscillating:
            p = np.exp(1j * rate * t)
            h += p * m
            h += np.conj(p) * m.conj().T
        return h


def _control_lowering(model: SystemModel) -> np.ndarray:
    """Sum of |0><r| lowering operators on the control atoms, weighted."""
    space = model.space
    amps = model.drives.control_amplitudes(space.n_atoms)
    op = np.zeros((space.dim, space.dim), dtype=complex)
    for atom, amp in enumerate(amps):
        op += amp * transition_op(space, atom, 0, RYDBERG_LEVEL)
    return op


def _target_lowering(model: SystemModel) -> np.ndarray:
    """Resonant target-drive lowering part: omega1 |0><r| + omega2 |1><r|."""
    space = model.space
    tgt = space.n_atoms - 1
    d = model.drives
    return d.omega1 * transition_op(space, tgt, 0, RYDBERG_LEVEL) + d.omega2 * transition_op(
        space, tgt, 1, RYDBERG_LEVEL
    )


def rri_diagonal(model: SystemModel) -> np.ndarray:
    """Pair-interaction energy of every product basis state.

    Entry ``x`` is the sum of ``U_jk`` over atom pairs that are both in
    |r> in basis state ``x``.
    """
    space = model.space
    u = model.interactions.u
    diag = np.zeros(space.dim)
    for idx in range(space.dim):
        levels = space.atom_levels(idx)
        ryd = [m for m, lev in enumerate(levels) if lev == RYDBERG_LEVEL]
        for a in range(len(ryd)):
            for b in range(a + 1, len(ryd)):
                diag[idx] += u[ryd[a], ryd[b]]
    return diag


def full_hamiltonian_terms(model: SystemModel) -> HamiltonianTerms:
    """Interaction-picture Hamiltonian of the driven register.

    Control drives carry the phase ``e^{i delta t}`` on their lowering
    part; target drives are static; pair interactions sit on the diagonal.
    """
    static = _target_lowering(model)
    static = static + static.conj().T
    static += np.diag(rri_diagonal(model)).astype(complex)
    return HamiltonianTerms(
        static=static,
        oscillating=((model.drives.delta, _control_lowering(model)),),
    )


def hamiltonian_full(model: SystemModel, t: float) -> np.ndarray:
    """Matrix of :func:`full_hamiltonian_terms` at time ``t``."""
    return full_hamiltonian_terms(model)(t)


def rotated_hamiltonian_terms(model: SystemModel) -> HamiltonianTerms:
    """Hamiltonian in the frame rotating with the pair-interaction energies.

    Moving to the frame generated by the diagonal interaction term turns
    every drive matrix element ``|a><b|`` into an oscillating term whose
    rate picks up the interaction-energy difference ``E_a - E_b`` on top
    of any drive phase; the diagonal itself cancels exactly.  No
    resonance condition is assumed, so this reproduces the usual
    single-step frame only as the special case U13 = U23 = delta.
    """
    space = model.space
    energies = rri_diagonal(model)
    dim = space.dim
    buckets: dict[float, np.ndarray] = {}

    def add_elements(base_rate: float, lowering: np.ndarray) -> None:
        rows, cols = np.nonzero(lowering)
        for a, b in zip(rows, cols):
            rate = base_rate + energies[a] - energies[b]
            key = round(rate, 9)
            if key not in buckets:
                buckets[key] = np.zeros((dim, dim), dtype=complex)
            buckets[key][a, b] += lowering[a, b]

    add_elements(0.0, _target_lowering(model))
    add_elements(model.drives.delta, _control_lowering(model))

    static = np.zeros((dim, dim), dtype=complex)
    if 0.0 in buckets:
        m0 = buckets.pop(0.0)
        static = m0 + m0.conj().T
    oscillating = tuple(sorted(buckets.items()))
    return HamiltonianTerms(static=static, oscillating=oscillating)


def hamiltonian_rotated(model: SystemModel, t: float) -> np.ndarray:
    """Matrix of :func:`rotated_hamiltonian_terms` at time ``t``."""
    return rotated_hamiltonian_terms(model)(t)


def interaction_frame_phases(model: SystemModel, t: float) -> np.ndarray:
    """Diagonal of the frame rotation ``exp(+i t E_x)`` used by the rotated frame.

    Multiplying a ket propagated under the full Hamiltonian by these phases
    maps it onto the rotated-frame trajectory.
    """
    return np.exp(1j * rri_diagonal(model) * t)


_BLOCK_IDS = (1, 2, 3, 4)


def block_hamiltonian_terms(model: SystemModel, block: int) -> HamiltonianTerms:
    """One of the four decoupled drive sectors of the rotated Hamiltonian.

    After dropping all fast-rotating terms (rates of order delta and above)
    the rotated Hamiltonian at the resonance point U13 = U23 = delta splits
    into four sectors labelled by the control-atom ground configuration:

    1. controls |00>: the target-excited state couples strongly to the
       single-control-excited states, which couple on to the all-excited
       state with a residual phase ``e^{-i U12 t}``;
    2. controls |01> and
    3. controls |10>: one strong coupling to a double-excited state;
    4. controls |11>: only the weak target drive survives (this is the
       effective gate sector, and it is static).

    The returned operator lives in the full register space, restricted to
    the sector's kets.  Only 3-atom registers have this sector structure.
    """
    if model.space.n_atoms != 3:
        raise ValueError("sector Hamiltonians are defined for the 3-atom register")
    if block not in _BLOCK_IDS:
        raise ValueError(f"invalid block id {block}; expected one of {_BLOCK_IDS}")
    space = model.space
    d = model.drives
    u12 = float(model.interactions.u[0, 1])
    dim = space.dim

    def entries(pairs) -> np.ndarray:
        m = np.zeros((dim, dim), dtype=complex)
        for row, col, amp in pairs:
            m[space.basis_index(row), space.basis_index(col)] += amp
        return m

    if block == 1:
        static = entries(
            [
                ("000", "00r", d.omega1),
                ("001", "00r", d.omega2),
                ("00r", "r0r", d.omega_prime),
                ("00r", "0rr", d.omega_dprime),
            ]
        )
        slow = entries(
            [
                ("0rr", "rrr", d.omega_prime),
                ("r0r", "rrr", d.omega_dprime),
            ]
        )
        return HamiltonianTerms(static=static + static.conj().T, oscillating=((-u12, slow),))
    if block == 2:
        static = entries(
            [
                ("010", "01r", d.omega1),
                ("011", "01r", d.omega2),
                ("01r", "r1r", d.omega_prime),
            ]
        )
    elif block == 3:
        static = entries(
            [
                ("100", "10r", d.omega1),
                ("101", "10r", d.omega2),
                ("10r", "1rr", d.omega_dprime),
            ]
        )
    else:
        static = entries(
            [
                ("110", "11r", d.omega1),
                ("111", "11r", d.omega2),
            ]
        )
    return HamiltonianTerms(static=static + static.conj().T)


def hamiltonian_block(model: SystemModel, block: int, t: float = 0.0) -> np.ndarray:
    """Matrix of :func:`block_hamiltonian_terms` at time ``t``."""
    return block_hamiltonian_terms(model, block)(t)


def hamiltonian_effective(model: SystemModel) -> np.ndarray:
    """Static effective gate Hamiltonian on the full register space.

    Keeps only the target drive in the all-controls-|1> sector:
    ``omega1 |1..10><1..1r| + omega2 |1..11><1..1r| + h.c.``.
    """
    space = model.space
    ones = "1" * (space.n_atoms - 1)
    h = np.zeros((space.dim, space.dim), dtype=complex)
    i0 = space.basis_index(ones + "0")
    i1 = space.basis_index(ones + "1")
    ir = space.basis_index(ones + "r")
    h[i0, ir] = model.drives.omega1
    h[i1, ir] = model.drives.omega2
    return h + h.conj().T


def jump_operators(model: SystemModel) -> list[tuple[float, np.ndarray]]:
    """Spontaneous-emission jump operators as ``(rate, matrix)`` pairs.

    One operator per atom per branch, ordered atom-major.  Rates follow
    :meth:`DecayModel.branch_rates`; the matrices are the plain lowering
    operators (rates are NOT folded into the matrices).
    """
    if model.decay is None:
        raise ValueError("model has no decay channels configured")
    space = model.space
    branches = model.decay.branch_rates()
    if any(dest >= space.n_levels for _, dest in branches):
        raise ValueError("leakage decay channel requested on a space without the |d> level")
    jumps = []
    for atom in range(space.n_atoms):
        for rate, dest in branches:
            jumps.append((rate, transition_op(space, atom, dest, RYDBERG_LEVEL)))
    return jumps


def control_drive_phase(omega: float, delta: float, t: float) -> float:
    """Deterministic phase of an undisturbed driven control atom in |0>.

    The off-resonant control drive light-shifts |0>; an isolated two-level
    atom prepared in |0> accumulates ``arg <0|U(t)|0>`` (close to the
    perturbative ``-omega^2 t / delta``).  Computed exactly from the 2x2
    propagator in the frame rotating at the drive detuning.
    """
    h = np.array([[0.0, omega], [omega, -delta]], dtype=complex)
    evals, evecs = np.linalg.eigh(h)
    u00 = (evecs[0, :] * np.exp(-1j * evals * t)) @ evecs[0, :].conj()
    return float(np.angle(u00))


def drive_phase_compensation(model: SystemModel, t: float) -> np.ndarray:
    """Output-side phase factors that absorb the control-drive light shifts.

    The always-on off-resonant control drive rotates every control qubit
    that sits in |0> by a known deterministic phase; re-referencing the
    local qubit frames (standard experimental practice) removes it.  The
    returned length-2^n vector holds one factor per computational basis
    state; applying ``diag(factors)`` after the gate cancels the
    accumulated single-atom phases exactly.
    """
    n = model.space.n_atoms
    amps = model.drives.control_amplitudes(n)
    phases = [control_drive_phase(a, model.drives.delta, t) for a in amps]
    factors = np.ones(2**n, dtype=complex)
    for state in range(2**n):
        acc = 0.0
        for c, ph in enumerate(phases):
            bit = (state >> (n - 1 - c)) & 1
            if bit == 0:
                acc += ph
        factors[state] = np.exp(-1j * acc)
    return factors


def ideal_gate(n_qubits: int) -> np.ndarray:
    """Ideal multi-controlled NOT: flip the last qubit iff all others are 1."""
    if n_qubits not in (3, 4):
        raise ValueError(f"unsupported qubit count {n_qubits}; expected 3 or 4")
    d = 2**n_qubits
    gate = np.zeros((d, d), dtype=complex)
    controls_mask = ((1 << (n_qubits - 1)) - 1) << 1
    for col in range(d):
        row = col ^ 1 if (col & controls_mask) == controls_mask else col
        gate[row, col] = 1.0
    return gate
