"""Gate-quality functionals: average gate fidelity and state populations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ProcessMap
from .spaces import pauli_basis

__all__ = [
    "FidelityResult",
    "average_fidelity",
    "population",
    "FourQubitProbe",
    "four_qubit_probe",
    "depolarized",
]


@dataclass(frozen=True)
class FidelityResult:
    """Average gate fidelity of a channel against a target unitary."""

    fbar: float
    d: int
    t_gate: float | None = None


def average_fidelity(channel, target: np.ndarray, t_gate: float | None = None) -> FidelityResult:
    """Average gate fidelity via the Pauli-basis sum

        Fbar(E, O) = [ sum_j tr(O O_j O^dag E(O_j)) + d^2 ] / [ d^2 (d + 1) ]

    where the O_j run over all d^2 Pauli strings of the subspace.

    Parameters
    ----------
    channel : ProcessMap or callable
        The extracted channel, or any function mapping a d x d operator to
        its image.
    target : ndarray
        The ideal gate unitary (d x d).
    """
    target = np.asarray(target, dtype=complex)
    d = target.shape[0]
    if target.shape != (d, d):
        raise ValueError("target must be square")
    n = int(round(np.log2(d)))
    if 2**n != d:
        raise ValueError("target dimension must be a power of two")
    if isinstance(channel, ProcessMap):
        if channel.dim != d:
            raise ValueError(f"channel dim {channel.dim} does not match target dim {d}")
        if t_gate is None:
            t_gate = channel.t_gate
        apply = channel.apply
    else:
        apply = channel

    t_dag = target.conj().T
    total = 0.0 + 0.0j
    for p in pauli_basis(n):
        o_j = p.matrix
        total += np.trace(target @ o_j @ t_dag @ apply(o_j))
    if abs(total.imag) > 1e-9 * max(abs(total.real), 1.0):
        raise ValueError(f"fidelity sum has a non-negligible imaginary part: {total.imag:g}")
    fbar = (total.real + d**2) / (d**2 * (d + 1))
    return FidelityResult(fbar=float(fbar), d=d, t_gate=t_gate)


def population(state: np.ndarray, target: np.ndarray) -> float:
    """Population of a (possibly superposed) target ket in a state.

    ``state`` may be a ket (returns ``|<target|state>|^2``) or a density
    matrix (returns ``<target|state|target>``).
    """
    state = np.asarray(state, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if target.ndim != 1:
        raise ValueError("target must be a ket")
    if state.ndim == 1:
        if state.shape != target.shape:
            raise ValueError("state and target dimensions differ")
        return float(np.abs(np.vdot(target, state)) ** 2)
    if state.ndim == 2:
        if state.shape != (target.size, target.size):
            raise ValueError("state and target dimensions differ")
        return float(np.real(np.vdot(target, state @ target)))
    raise ValueError("state must be a ket or a density matrix")


@dataclass(frozen=True)
class FourQubitProbe:
    """Probe pair for the four-qubit population-transfer check.

    ``psi_init`` is the uniform 16-term superposition with the amplitude
    of |1110> flipped in sign; ``phi_target`` flips |1111> instead.  The
    gate maps one onto the other, so the population of ``phi_target``
    grows from 9/16 to 1 over one gate time.
    """

    psi_init: np.ndarray
    phi_target: np.ndarray

    def __post_init__(self):
        for name in ("psi_init", "phi_target"):
            ket = np.asarray(getattr(self, name), dtype=complex)
            if abs(np.linalg.norm(ket) - 1.0) > 1e-12:
                raise ValueError(f"{name} is not normalized")
            ket.flags.writeable = False
            object.__setattr__(self, name, ket)


def four_qubit_probe() -> FourQubitProbe:
    """Build the 16-dimensional computational-basis probe pair."""
    psi = np.full(16, 0.25, dtype=complex)
    phi = psi.copy()
    psi[0b1110] -= 0.5
    phi[0b1111] -= 0.5
    return FourQubitProbe(psi_init=psi, phi_target=phi)


def depolarized(channel: ProcessMap, strength: float) -> ProcessMap:
    """Compose a channel with depolarizing noise of the given strength.

    Used for monotonicity sanity checks: extra depolarization can never
    raise the average fidelity.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError("strength must be in [0, 1]")
    d = channel.dim
    eye = np.eye(d, dtype=complex).reshape(-1)
    s_dep = (1.0 - strength) * np.eye(d * d, dtype=complex) + strength * np.outer(eye, eye) / d
    return ProcessMap(
        superoperator=s_dep @ channel.superoperator,
        dim=d,
        t_gate=channel.t_gate,
        drift=channel.drift,
    )
