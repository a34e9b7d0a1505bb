"""Dense complex operator algebra for small registers of multi-level atoms.

Conventions used throughout the package:

* Atom 0 is the leftmost tensor factor, so a basis label such as ``"01r"``
  reads atom by atom from left to right.
* Per-atom levels are indexed 0 = ``|0>``, 1 = ``|1>``, 2 = ``|r>`` (the
  driven excited level) and 3 = ``|d>`` (an optional uncoupled level that
  only receives decay).
* Kets are 1-D ``complex128`` arrays, operators are square 2-D
  ``complex128`` arrays.  Everything is dense; the largest space handled
  here is 4 atoms x 4 levels = 256 dimensions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LEVEL_LABELS",
    "RYDBERG_LEVEL",
    "LEAKAGE_LEVEL",
    "HilbertSpace",
    "CompSubspaceMap",
    "PauliString",
    "build_space",
    "transition_op",
    "computational_subspace",
    "embed_comp",
    "project_comp",
    "pauli_basis",
]

LEVEL_LABELS = "01rd"
RYDBERG_LEVEL = 2
LEAKAGE_LEVEL = 3

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HilbertSpace:
    """Tensor-product space of ``n_atoms`` identical ``n_levels``-level atoms.

    Parameters
    ----------
    n_atoms : int
        Number of atoms in the register.
    n_levels : int
        Levels per atom; 3 for {|0>, |1>, |r>} or 4 when the uncoupled
        leakage level |d> is included.
    """

    n_atoms: int
    n_levels: int

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("need at least one atom")
        if not 2 <= self.n_levels <= len(LEVEL_LABELS):
            raise ValueError(f"n_levels must be in [2, {len(LEVEL_LABELS)}]")

    @property
    def dim(self) -> int:
        """Total dimension ``n_levels ** n_atoms``."""
        return self.n_levels**self.n_atoms

    @property
    def has_leakage(self) -> bool:
        return self.n_levels > LEAKAGE_LEVEL

    def basis_index(self, label) -> int:
        """Index of a product basis state.

        ``label`` is either a string like ``"1r0"`` (atom 0 leftmost) or a
        sequence of per-atom level indices.
        """
        if isinstance(label, str):
            if len(label) != self.n_atoms:
                raise ValueError(f"label {label!r} has wrong length for {self.n_atoms} atoms")
            levels = [LEVEL_LABELS.index(c) for c in label]
        else:
            levels = list(label)
        idx = 0
        for lev in levels:
            if not 0 <= lev < self.n_levels:
                raise ValueError(f"level {lev} out of range for {self.n_levels}-level atoms")
            idx = idx * self.n_levels + lev
        return idx

    def basis_label(self, index: int) -> str:
        """Inverse of :meth:`basis_index`."""
        if not 0 <= index < self.dim:
            raise ValueError("basis index out of range")
        digits = []
        for _ in range(self.n_atoms):
            index, lev = divmod(index, self.n_levels)
            digits.append(LEVEL_LABELS[lev])
        return "".join(reversed(digits))

    def basis_ket(self, label) -> np.ndarray:
        """Unit ket for a product basis state."""
        ket = np.zeros(self.dim, dtype=complex)
        ket[self.basis_index(label)] = 1.0
        return ket

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def atom_levels(self, index: int) -> tuple[int, ...]:
        """Per-atom level indices of a product basis state."""
        levels = []
        for _ in range(self.n_atoms):
            index, lev = divmod(index, self.n_levels)
            levels.append(lev)
        return tuple(reversed(levels))


def build_space(n_atoms: int, with_leakage: bool = False) -> HilbertSpace:
    """Create the register space for the gate schemes supported here.

    Only 3- and 4-atom registers are meaningful for the implemented gates;
    anything else raises ``ValueError``.
    """
    if n_atoms not in (3, 4):
        raise ValueError(f"unsupported atom count {n_atoms}; expected 3 or 4")
    return HilbertSpace(n_atoms=n_atoms, n_levels=4 if with_leakage else 3)


def transition_op(space: HilbertSpace, atom: int, a: int, b: int) -> np.ndarray:
    """Operator ``|a><b|`` on one atom, identity on all the others.

    Parameters
    ----------
    space : HilbertSpace
    atom : int
        Atom index, 0-based, atom 0 leftmost.
    a, b : int
        Level indices of the bra/ket on that atom.

    Returns
    -------
    ndarray
        ``dim x dim`` complex matrix.
    """
    n = space.n_levels
    if not 0 <= atom < space.n_atoms:
        raise ValueError(f"atom index {atom} out of range")
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"level indices ({a}, {b}) out of range")
    single = np.zeros((n, n), dtype=complex)
    single[a, b] = 1.0
    op = np.eye(1, dtype=complex)
    for m in range(space.n_atoms):
        op = np.kron(op, single if m == atom else np.eye(n, dtype=complex))
    return op


@dataclass(frozen=True)
class CompSubspaceMap:
    """Embedding of the 2^n computational basis into the full register space.

    ``indices[k]`` is the full-space basis index of the k-th computational
    state, with computational states ordered as binary strings (atom 0 is
    the most significant bit).
    """

    space: HilbertSpace
    indices: tuple[int, ...]

    def __post_init__(self):
        if len(self.indices) != 2**self.space.n_atoms:
            raise ValueError("computational map must list 2^n_atoms states")
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError("indices must be strictly increasing")
        for idx in self.indices:
            if any(lev > 1 for lev in self.space.atom_levels(idx)):
                raise ValueError(f"state {self.space.basis_label(idx)} is not computational")

    @property
    def dim(self) -> int:
        return len(self.indices)

    def index_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)


def computational_subspace(space: HilbertSpace) -> CompSubspaceMap:
    """Map of all-atoms-in-{|0>,|1>} states, in binary order."""
    indices = []
    for bits in itertools.product((0, 1), repeat=space.n_atoms):
        indices.append(space.basis_index(bits))
    return CompSubspaceMap(space=space, indices=tuple(indices))


def embed_comp(op_small: np.ndarray, cmap: CompSubspaceMap) -> np.ndarray:
    """Embed a computational-subspace operator into the full space.

    The result equals ``op_small`` on the mapped index pairs and is zero
    everywhere else.
    """
    op_small = np.asarray(op_small, dtype=complex)
    d = cmap.dim
    if op_small.shape != (d, d):
        raise ValueError(f"operator shape {op_small.shape} does not match subspace dim {d}")
    out = np.zeros((cmap.space.dim, cmap.space.dim), dtype=complex)
    ix = cmap.index_array()
    out[np.ix_(ix, ix)] = op_small
    return out


def project_comp(op_full: np.ndarray, cmap: CompSubspaceMap) -> np.ndarray:
    """Restrict a full-space operator to the computational subspace."""
    op_full = np.asarray(op_full, dtype=complex)
    dim = cmap.space.dim
    if op_full.shape != (dim, dim):
        raise ValueError(f"operator shape {op_full.shape} does not match space dim {dim}")
    ix = cmap.index_array()
    return op_full[np.ix_(ix, ix)].copy()


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Pauli matrices, e.g. ``"IXZ"``."""

    labels: str
    matrix: np.ndarray

    @classmethod
    def from_labels(cls, labels: str) -> "PauliString":
        m = np.eye(1, dtype=complex)
        for c in labels:
            if c not in _PAULI_1Q:
                raise ValueError(f"unknown Pauli label {c!r}")
            m = np.kron(m, _PAULI_1Q[c])
        return cls(labels=labels, matrix=_readonly(m))

    @property
    def n_qubits(self) -> int:
        return len(self.labels)


def pauli_basis(n_qubits: int) -> list[PauliString]:
    """All 4^n Pauli strings in lexicographic order (I < X < Y < Z per qubit).

    The first element is the identity.  The strings are orthogonal under the
    trace inner product: ``tr(P_j P_k) = 2^n delta_jk``.
    """
    if n_qubits not in (3, 4):
        raise ValueError(f"unsupported qubit count {n_qubits}; expected 3 or 4")
    return [
        PauliString.from_labels("".join(chars))
        for chars in itertools.product("IXYZ", repeat=n_qubits)
    ]
