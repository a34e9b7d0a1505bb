"""Second-order reduction of strongly driven sectors onto slow subspaces.

Two tools: diagonalization of the strong-drive coupling among the
single-Rydberg states into dressed states, and the symmetric second-order
effective Hamiltonian obtained by eliminating a strongly coupled excited
manifold through a regularized inverse.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import SystemModel

__all__ = [
    "DressedSpectrum",
    "dressed_states",
    "EffectiveBlock",
    "effective_hamiltonian",
    "block1_partition",
]

DRESSED_BASIS = ("00r", "r0r", "0rr")


@dataclass(frozen=True)
class DressedSpectrum:
    """Eigen-decomposition of the strong-coupling manifold.

    ``eigenvalues`` are ordered (+sqrt(2) w', -sqrt(2) w', 0); column k of
    ``eigenvectors`` is the eigenvector for ``eigenvalues[k]``, expressed
    over ``basis_labels``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    basis_labels: tuple[str, ...] = DRESSED_BASIS


def dressed_states(omega_prime: float) -> DressedSpectrum:
    """Dressed states of the target-excited manifold under the control drives.

    In the strong-blockade limit the all-excited state decouples and the
    control drives couple the target-excited state to the two
    single-control-excited states with equal strength ``omega_prime``:

        H = w' (|00r><r0r| + |00r><0rr|) + h.c.

    whose eigenpairs are (+sqrt(2) w', -sqrt(2) w', 0) with eigenvectors
    (sqrt(2)|00r> +- |r0r> +- |0rr|)/2 and (|r0r> - |0rr>)/sqrt(2).
    """
    if omega_prime <= 0:
        raise ValueError("omega_prime must be positive")
    h = np.array(
        [
            [0.0, omega_prime, omega_prime],
            [omega_prime, 0.0, 0.0],
            [omega_prime, 0.0, 0.0],
        ],
        dtype=complex,
    )
    w, v = np.linalg.eigh(h)
    order = [int(np.argmax(w)), int(np.argmin(w)), int(np.argmin(np.abs(w)))]
    vals = w[order].real
    vecs = v[:, order]
    # gauge: leading nonzero component real positive
    for k in range(3):
        lead = np.flatnonzero(np.abs(vecs[:, k]) > 1e-12)[0]
        vecs[:, k] *= np.exp(-1j * np.angle(vecs[lead, k]))
    return DressedSpectrum(eigenvalues=vals, eigenvectors=vecs)


@dataclass(frozen=True)
class EffectiveBlock:
    """Partition ``H = H_e + V_+ + V_-`` of a sector Hamiltonian.

    ``h_e`` is the Hermitian strong block on the excited manifold,
    ``v_minus`` the weak coupling from the excited manifold down to the
    slow (ground) manifold, and ``v_plus`` its adjoint.  ``reg_eps`` is
    the magnitude used to regularize singular directions of ``h_e``.

    Optional label tuples record which basis kets span each manifold.
    """

    h_e: np.ndarray
    v_minus: np.ndarray
    reg_eps: float
    v_plus: np.ndarray | None = None
    ground_labels: tuple[str, ...] | None = None
    excited_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        h_e = np.asarray(self.h_e, dtype=complex)
        v_minus = np.asarray(self.v_minus, dtype=complex)
        if h_e.ndim != 2 or h_e.shape[0] != h_e.shape[1]:
            raise ValueError("h_e must be square")
        scale = max(np.max(np.abs(h_e)), 1.0)
        if np.max(np.abs(h_e - h_e.conj().T)) > 1e-12 * scale:
            raise ValueError("h_e must be Hermitian")
        if v_minus.shape[1] != h_e.shape[0]:
            raise ValueError("v_minus must map the excited manifold to the ground manifold")
        if self.v_plus is None:
            object.__setattr__(self, "v_plus", v_minus.conj().T)
        else:
            v_plus = np.asarray(self.v_plus, dtype=complex)
            if np.max(np.abs(v_plus - v_minus.conj().T)) > 1e-12 * max(np.max(np.abs(v_plus)), 1.0):
                raise ValueError("v_plus must equal the adjoint of v_minus")
            object.__setattr__(self, "v_plus", v_plus)
        if self.reg_eps <= 0:
            raise ValueError("reg_eps must be positive")
        object.__setattr__(self, "h_e", h_e)
        object.__setattr__(self, "v_minus", v_minus)


DEFAULT_REG_EPS_FACTOR = 1e-7


def effective_hamiltonian(block: EffectiveBlock) -> np.ndarray:
    """Second-order effective Hamiltonian on the slow manifold.

    Evaluates ``-(V- He^-1 V+ + V- (He^-1)^dag V+) / 2`` with the inverse
    taken in the eigenbasis of ``h_e``: eigenvalues of magnitude below
    ``reg_eps`` are replaced by ``reg_eps`` before inversion, which keeps
    exact zero modes (they are orthogonal to the weak coupling in the
    cases of interest) from polluting the result while leaving the
    non-singular part of the inverse untouched.

    The symmetric form guarantees a Hermitian result by construction.
    """
    w, q = np.linalg.eigh(block.h_e)
    scale = np.max(np.abs(w))
    if scale == 0.0:
        raise ValueError("h_e is identically zero; nothing to invert")
    w_reg = np.where(np.abs(w) < block.reg_eps, block.reg_eps, w)
    h_inv = (q * (1.0 / w_reg)) @ q.conj().T

    smallest_kept = np.min(np.abs(w)[np.abs(w) >= block.reg_eps], initial=np.inf)
    v_norm = np.linalg.norm(block.v_minus, ord=2)
    if np.isfinite(smallest_kept) and v_norm > 0.1 * smallest_kept:
        warnings.warn(
            "weak coupling is not small against the strong-block gap; "
            "the second-order reduction may be inaccurate",
            stacklevel=2,
        )

    h_eff = -0.5 * (
        block.v_minus @ h_inv @ block.v_plus + block.v_minus @ h_inv.conj().T @ block.v_plus
    )
    return 0.5 * (h_eff + h_eff.conj().T)


def block1_partition(model: SystemModel, reg_eps: float | None = None) -> EffectiveBlock:
    """Strong/weak partition of drive sector 1 (controls in |00>).

    The time-independent form of the sector keeps the pair-interaction
    energy of the all-excited state as a diagonal entry, giving

        H_e = w'(|00r><r0r| + |0rr><rrr|) + w''(|00r><0rr| + |r0r><rrr|)
              + h.c. + U12 |rrr><rrr|
        V-  = w1 |000><00r| + w2 |001><00r|

    over the ordered manifolds ("000", "001") and
    ("00r", "r0r", "0rr", "rrr").
    """
    if model.space.n_atoms != 3:
        raise ValueError("sector 1 is defined for the 3-atom register")
    d = model.drives
    u12 = float(model.interactions.u[0, 1])
    if reg_eps is None:
        reg_eps = DEFAULT_REG_EPS_FACTOR * d.omega_prime

    excited = ("00r", "r0r", "0rr", "rrr")
    ground = ("000", "001")
    h_e = np.zeros((4, 4), dtype=complex)
    h_e[0, 1] = d.omega_prime   # |00r><r0r|
    h_e[0, 2] = d.omega_dprime  # |00r><0rr|
    h_e[2, 3] = d.omega_prime   # |0rr><rrr|
    h_e[1, 3] = d.omega_dprime  # |r0r><rrr|
    h_e = h_e + h_e.conj().T
    h_e[3, 3] = u12
    v_minus = np.zeros((2, 4), dtype=complex)
    v_minus[0, 0] = d.omega1
    v_minus[1, 0] = d.omega2
    return EffectiveBlock(
        h_e=h_e,
        v_minus=v_minus,
        reg_eps=reg_eps,
        ground_labels=ground,
        excited_labels=excited,
    )
