"""Time propagation and quantum-channel extraction.

Pure-state propagation solves i d|psi>/dt = H(t)|psi>; open-system
propagation solves the Lindblad master equation

    drho/dt = -i [H(t), rho] + sum_j g_j (s_j rho s_j^dag
              - (s_j^dag s_j rho + rho s_j^dag s_j) / 2)

for jump operators ``s_j`` at rates ``g_j``.  The default integrator is a
fixed-step classic 4th-order Runge-Kutta whose step is tied to the fastest
drive phase (convergence is certified by step doubling in the test suite);
an adaptive embedded pair (scipy's RK45) is available as an alternative.

Channel extraction propagates a complete operator basis of the
computational subspace through the dynamics and assembles the induced
linear map by linearity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import HamiltonianTerms
from .spaces import CompSubspaceMap

__all__ = [
    "IntegrationError",
    "IntegratorConfig",
    "EvolutionResult",
    "ProcessMap",
    "gate_time",
    "default_step",
    "resolve_step",
    "evolve_ket",
    "evolve_density",
    "extract_channel",
    "unitary_channel_samples",
]

PHASE_SAMPLES = 50       # fixed-step points per period of the fastest drive phase
ENFORCE_SAMPLES = 40     # user-supplied steps must resolve the fastest phase this well
STABILITY_MARGIN = 2.0   # bound on ||H|| * dt inside the classic RK4 stability region


class IntegrationError(RuntimeError):
    """Raised for invalid integrator setup or a failed propagation."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration controls.

    ``method`` is ``"rk4"`` (fixed step ``dt``, chosen automatically when
    ``None``) or ``"adaptive"`` (embedded RK45 pair controlled by
    ``rel_tol``/``abs_tol``).  ``store_every`` thins the stored trajectory:
    every k-th fixed step is kept (0 keeps endpoints only); in adaptive
    mode a positive value requests that many equally spaced intervals.
    """

    method: str = "rk4"
    dt: float | None = None
    rel_tol: float = 1e-8
    abs_tol: float = 1e-11
    store_every: int = 0

    def __post_init__(self):
        if self.method not in ("rk4", "adaptive"):
            raise ValueError("method must be 'rk4' or 'adaptive'")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.store_every < 0:
            raise ValueError("store_every must be non-negative")


@dataclass(frozen=True)
class EvolutionResult:
    """Sampled trajectory of a propagation.

    ``states`` has shape (n_samples, dim) for kets and
    (n_samples, dim, dim) for density matrices.  ``populations`` holds the
    requested named-state populations sampled at ``times``.  ``drift`` is
    the deviation of the conserved quantity (ket norm / trace) at the
    final time; no renormalization is ever applied.
    """

    times: np.ndarray
    states: np.ndarray
    populations: dict[str, np.ndarray] | None
    drift: float

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def gate_time(omega1: float, omega2: float) -> float:
    """Single-step gate duration ``pi / sqrt(omega1^2 + omega2^2)``."""
    rabi = math.hypot(omega1, omega2)
    if rabi == 0.0:
        raise ValueError("gate time undefined for zero target drive")
    return math.pi / rabi


class _HSource:
    """Uniform access to a Hamiltonian given as terms, a matrix or a callable."""

    def __init__(self, h):
        if isinstance(h, HamiltonianTerms):
            self.terms = h
            self.dim = h.dim
        elif callable(h):
            self.terms = None
            self._fn = h
            self.dim = int(np.asarray(h(0.0)).shape[0])
        else:
            mat = np.asarray(h, dtype=complex)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValueError("Hamiltonian matrix must be square")
            self.terms = HamiltonianTerms(static=mat)
            self.dim = mat.shape[0]
        if self.terms is not None:
            self._static = self.terms.static
            self._osc = [
                (rate, m, np.ascontiguousarray(m.conj().T))
                for rate, m in self.terms.oscillating
            ]
            self._scratch = np.empty((self.dim, self.dim), dtype=complex)

    @property
    def max_phase_rate(self) -> float | None:
        return None if self.terms is None else self.terms.max_phase_rate

    def spectral_bound(self) -> float | None:
        return None if self.terms is None else self.terms.spectral_bound()

    def matrix(self, t: float, out: np.ndarray) -> np.ndarray:
        if self.terms is None:
            np.copyto(out, self._fn(t))
            return out
        np.copyto(out, self._static)
        for rate, m, mdag in self._osc:
            p = np.exp(1j * rate * t)
            np.multiply(m, p, out=self._scratch)
            out += self._scratch
            np.multiply(mdag, p.conjugate(), out=self._scratch)
            out += self._scratch
        return out


def default_step(h, t_final: float | None = None) -> float:
    """Automatic fixed step for a Hamiltonian with known structure.

    ``(2*pi / w) / PHASE_SAMPLES`` for the fastest oscillation rate ``w``
    (the spectral bound stands in when the Hamiltonian is static), further
    capped by the RK4 stability bound ``STABILITY_MARGIN / ||H||``, which
    only bites for very strong pair interactions.
    """
    src = h if isinstance(h, _HSource) else _HSource(h)
    if src.terms is None:
        raise IntegrationError("cannot choose a step for an opaque Hamiltonian callable; set dt")
    rate = src.max_phase_rate
    bound = src.spectral_bound()
    scale = rate if rate else bound
    if not scale or scale <= 0.0:
        if t_final is None:
            raise IntegrationError("Hamiltonian is zero; provide dt or t_final")
        return t_final
    dt = (2.0 * math.pi / scale) / PHASE_SAMPLES
    if bound and bound > 0.0:
        dt = min(dt, STABILITY_MARGIN / bound)
    if t_final is not None:
        dt = min(dt, t_final)
    return dt


def _resolve_dt(src: _HSource, cfg: IntegratorConfig, t_final: float) -> float:
    if cfg.dt is not None:
        rate = src.max_phase_rate
        if rate and cfg.dt > (2.0 * math.pi / rate) / ENFORCE_SAMPLES * (1.0 + 1e-12):
            raise IntegrationError(
                f"dt={cfg.dt:g} too coarse for drive phase rate {rate:g} rad/us; "
                f"need dt <= {(2.0 * math.pi / rate) / ENFORCE_SAMPLES:g}"
            )
        return cfg.dt
    return default_step(src, t_final)


def resolve_step(h, cfg: IntegratorConfig | None, t_final: float) -> float:
    """The fixed step a propagation with this config would actually use."""
    cfg = cfg or IntegratorConfig()
    return _resolve_dt(_HSource(h), cfg, t_final)


def _sample_steps(n_steps: int, store_every: int) -> list[int]:
    if store_every <= 0:
        return [0, n_steps]
    steps = list(range(0, n_steps, store_every))
    steps.append(n_steps)
    return steps


def _check_finite(arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr.view(float))):
        raise IntegrationError("propagation produced non-finite values")


def _rk4_run(rhs, y: np.ndarray, t_final: float, dt: float, store_every: int,
             post_step=None):
    """Generic fixed-step RK4 on a preallocated complex state array.

    ``rhs(t, y, out)`` writes the derivative of ``y`` into ``out``.
    Returns (sample times, list of state copies).
    """
    if t_final < 0:
        raise IntegrationError("t_final must be non-negative")
    n_steps = max(1, math.ceil(t_final / dt - 1e-9)) if t_final > 0 else 0
    dt = t_final / n_steps if n_steps else 0.0
    sample_at = _sample_steps(n_steps, store_every)
    samples = [y.copy()]
    times = [0.0]
    k1 = np.empty_like(y)
    k2 = np.empty_like(y)
    k3 = np.empty_like(y)
    k4 = np.empty_like(y)
    ytmp = np.empty_like(y)
    next_sample = 1
    for step in range(n_steps):
        t = step * dt
        rhs(t, y, k1)
        np.multiply(k1, 0.5 * dt, out=ytmp)
        ytmp += y
        rhs(t + 0.5 * dt, ytmp, k2)
        np.multiply(k2, 0.5 * dt, out=ytmp)
        ytmp += y
        rhs(t + 0.5 * dt, ytmp, k3)
        np.multiply(k3, dt, out=ytmp)
        ytmp += y
        rhs(t + dt, ytmp, k4)
        k2 += k3
        k2 *= 2.0
        k2 += k1
        k2 += k4
        k2 *= dt / 6.0
        y += k2
        if post_step is not None:
            post_step(y)
        if next_sample < len(sample_at) and step + 1 == sample_at[next_sample]:
            _check_finite(y)
            samples.append(y.copy())
            times.append((step + 1) * dt)
            next_sample += 1
    if n_steps == 0:
        samples.append(y.copy())
        times.append(0.0)
    return np.asarray(times), samples


class _KetRHS:
    """d|psi>/dt = -i H(t) |psi| on a (dim, batch) column block."""

    def __init__(self, src: _HSource, batch: int):
        self.src = src
        self.h = np.empty((src.dim, src.dim), dtype=complex)

    def __call__(self, t, y, out):
        self.src.matrix(t, self.h)
        np.matmul(self.h, y, out=out)
        out *= -1j


class _DensityRHS:
    """Lindblad right-hand side on a (batch, dim, dim) block.

    Folds the commutator and the anticommutator sink into an effective
    non-Hermitian generator ``A = -iH - sum_j g_j s_j^dag s_j / 2`` so that
    ``drho = A rho + rho A^dag + sum_j g_j s_j rho s_j^dag``; the sandwich
    terms use index-transfer fast paths for monomial jump matrices.
    """

    def __init__(self, src: _HSource, jumps, batch: int):
        d = src.dim
        self.src = src
        self.h = np.empty((d, d), dtype=complex)
        self.a = np.empty((d, d), dtype=complex)
        self.a_dag = np.empty((d, d), dtype=complex)
        self.m1 = np.empty((batch, d, d), dtype=complex)
        self.dim = d
        self.transfers = []       # (row_idx, col_idx, weight matrix) fast paths
        self.generic = []         # (rate, s, s_dag) fallback
        sink = np.zeros((d, d), dtype=complex)
        for rate, s in jumps or ():
            s = np.asarray(s, dtype=complex)
            sink += rate * (s.conj().T @ s)
            rows, cols = np.nonzero(s)
            monomial = len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
            if monomial:
                w = s[rows, cols]
                weight = rate * np.outer(w, w.conj())
                self.transfers.append((rows, cols, weight))
            else:
                self.generic.append((rate, s, np.ascontiguousarray(s.conj().T)))
        self.sink_half = 0.5 * sink if jumps else None

    def __call__(self, t, rho, out):
        d = self.dim
        b = rho.shape[0]
        h = self.src.matrix(t, self.h)
        np.multiply(h, -1j, out=self.a)
        if self.sink_half is not None:
            self.a -= self.sink_half
        np.conjugate(self.a.T, out=self.a_dag)
        np.matmul(rho.reshape(b * d, d), self.a_dag, out=self.m1.reshape(b * d, d))
        np.matmul(self.a, rho, out=out)
        out += self.m1
        for rows, cols, weight in self.transfers:
            out[:, rows[:, None], rows[None, :]] += weight * rho[:, cols[:, None], cols[None, :]]
        for rate, s, s_dag in self.generic:
            np.matmul(s, rho, out=self.m1)
            out += rate * np.matmul(self.m1, s_dag)


def _hermitize(rho: np.ndarray) -> None:
    rho += np.conj(np.swapaxes(rho, -1, -2))
    rho *= 0.5


def _adaptive_run(rhs, y0: np.ndarray, t_final: float, cfg: IntegratorConfig):
    from scipy.integrate import solve_ivp

    shape = y0.shape
    out = np.empty_like(y0)

    def f(t, yflat):
        rhs(t, yflat.reshape(shape), out)
        return out.ravel().copy()

    n_samples = cfg.store_every if cfg.store_every > 0 else 1
    t_eval = np.linspace(0.0, t_final, n_samples + 1)
    sol = solve_ivp(
        f,
        (0.0, t_final),
        y0.ravel().astype(complex),
        t_eval=t_eval,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        method="RK45",
    )
    if not sol.success:
        raise IntegrationError(f"adaptive integration failed: {sol.message}")
    samples = [sol.y[:, k].reshape(shape).copy() for k in range(sol.y.shape[1])]
    return sol.t, samples


def _population_traces(samples, track):
    pops = {}
    for name, target in track.items():
        target = np.asarray(target, dtype=complex)
        vals = []
        for state in samples:
            if state.ndim == 1:
                vals.append(float(np.abs(np.vdot(target, state)) ** 2))
            else:
                vals.append(float(np.real(np.vdot(target, state @ target))))
        pops[name] = np.asarray(vals)
    return pops


def evolve_ket(h, psi0: np.ndarray, t_final: float, cfg: IntegratorConfig | None = None,
               track: dict[str, np.ndarray] | None = None) -> EvolutionResult:
    """Propagate a pure state.

    Parameters
    ----------
    h : HamiltonianTerms, ndarray or callable
        Hamiltonian source; a bare matrix means a static Hamiltonian, a
        callable must map t -> matrix (and then needs an explicit dt).
    psi0 : ndarray
        Normalized initial ket.
    t_final : float
        Propagation time.
    cfg : IntegratorConfig, optional
    track : dict, optional
        Named kets whose populations are recorded at every sample.
    """
    cfg = cfg or IntegratorConfig()
    src = _HSource(h)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (src.dim,):
        raise ValueError(f"initial ket has dimension {psi0.shape}, expected ({src.dim},)")
    norm0 = np.linalg.norm(psi0)
    if abs(norm0 - 1.0) > 1e-6:
        raise ValueError("initial ket is not normalized")
    y = psi0.reshape(src.dim, 1).copy()
    rhs = _KetRHS(src, 1)
    if cfg.method == "adaptive":
        times, cols = _adaptive_run(rhs, y, t_final, cfg)
    else:
        dt = _resolve_dt(src, cfg, t_final)
        times, cols = _rk4_run(rhs, y, t_final, dt, cfg.store_every)
    samples = [c[:, 0].copy() for c in cols]
    _check_finite(samples[-1])
    drift = abs(float(np.linalg.norm(samples[-1])) - float(norm0))
    pops = _population_traces(samples, track) if track else None
    return EvolutionResult(times=times, states=np.asarray(samples), populations=pops, drift=drift)


def evolve_density(h, jumps, rho0: np.ndarray, t_final: float,
                   cfg: IntegratorConfig | None = None,
                   track: dict[str, np.ndarray] | None = None,
                   hermitize: bool = True) -> EvolutionResult:
    """Propagate a density matrix under the Lindblad master equation.

    ``jumps`` is a list of ``(rate, matrix)`` pairs (possibly empty).
    With ``hermitize`` (the default) the state is symmetrized to
    ``(rho + rho^dag)/2`` after every step, which is appropriate for
    physical states; pass ``False`` to propagate general matrices (the
    generator is linear, so non-Hermitian inputs are meaningful and are
    used by channel extraction).
    """
    cfg = cfg or IntegratorConfig()
    src = _HSource(h)
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (src.dim, src.dim):
        raise ValueError(f"density matrix shape {rho0.shape} does not match dim {src.dim}")
    y = rho0[None, :, :].copy()
    rhs = _DensityRHS(src, jumps, 1)
    trace0 = complex(np.trace(rho0))
    post = _hermitize if hermitize else None
    if cfg.method == "adaptive":
        times, blocks = _adaptive_run(rhs, y, t_final, cfg)
    else:
        dt = _resolve_dt(src, cfg, t_final)
        times, blocks = _rk4_run(rhs, y, t_final, dt, cfg.store_every, post_step=post)
    samples = [b[0].copy() for b in blocks]
    _check_finite(samples[-1])
    drift = abs(complex(np.trace(samples[-1])) - trace0)
    pops = _population_traces(samples, track) if track else None
    return EvolutionResult(times=times, states=np.asarray(samples), populations=pops, drift=drift)


@dataclass(frozen=True)
class ProcessMap:
    """Linear map on computational-subspace operators, in superoperator form.

    ``superoperator`` acts on row-major vectorized ``dim x dim`` operators:
    ``vec(E(A)) = S @ vec(A)``.  ``drift`` carries the worst trace/norm
    deviation seen while extracting the map.
    """

    superoperator: np.ndarray
    dim: int
    t_gate: float
    drift: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.superoperator, dtype=complex)
        if s.shape != (self.dim**2, self.dim**2):
            raise ValueError("superoperator shape does not match dim^2")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "superoperator", s)

    def apply(self, op: np.ndarray) -> np.ndarray:
        """Image of a ``dim x dim`` operator under the map."""
        op = np.asarray(op, dtype=complex)
        if op.shape != (self.dim, self.dim):
            raise ValueError("operator dimension mismatch")
        return (self.superoperator @ op.reshape(-1)).reshape(self.dim, self.dim)

    def with_output_phases(self, factors: np.ndarray) -> "ProcessMap":
        """Compose with a diagonal phase gate on the output side.

        ``factors`` is a length-dim vector of unit-modulus factors; the
        result maps ``A -> C E(A) C^dag`` with ``C = diag(factors)``.
        """
        factors = np.asarray(factors, dtype=complex)
        if factors.shape != (self.dim,):
            raise ValueError("phase vector dimension mismatch")
        c = np.diag(factors)
        return ProcessMap(
            superoperator=np.kron(c, c.conj()) @ self.superoperator,
            dim=self.dim,
            t_gate=self.t_gate,
            drift=self.drift,
        )

    @classmethod
    def from_block_unitary(cls, w: np.ndarray, t_gate: float, drift: float = 0.0) -> "ProcessMap":
        """Map ``A -> W A W^dag`` (W need not be exactly unitary)."""
        w = np.asarray(w, dtype=complex)
        return cls(
            superoperator=np.kron(w, w.conj()),
            dim=w.shape[0],
            t_gate=t_gate,
            drift=drift,
        )


def _unit_pairs(dsub: int) -> list[tuple[int, int]]:
    """Diagonal then upper-triangular matrix-unit index pairs."""
    pairs = [(i, i) for i in range(dsub)]
    pairs += [(i, j) for i in range(dsub) for j in range(i + 1, dsub)]
    return pairs


@dataclass(frozen=True)
class _MonodromyPlan:
    dt: float
    steps_per_period: int
    n_periods: int
    t_frac: float

    @property
    def period(self) -> float:
        return self.dt * self.steps_per_period


def _monodromy_plan(src: _HSource, cfg: IntegratorConfig, t_final: float):
    """Plan a one-period-propagator evaluation when the drive is periodic.

    Applicable for the default fixed step when the Hamiltonian has exactly
    one oscillation rate: the generator is then exactly periodic, so the
    evolution over the full window is the one-period map raised to the
    number of whole periods, times a short fractional tail.  This is the
    same RK4 discretization as direct stepping, reorganized.
    """
    if cfg.method != "rk4" or cfg.dt is not None or src.terms is None:
        return None
    rates = {abs(r) for r, _ in src.terms.oscillating if r != 0.0}
    if len(rates) != 1:
        return None
    period = 2.0 * math.pi / rates.pop()
    steps = PHASE_SAMPLES
    bound = src.spectral_bound()
    if bound and bound > 0.0:
        steps = max(steps, math.ceil(period * bound / STABILITY_MARGIN))
    n_periods = math.floor(t_final / period + 1e-9)
    if n_periods < 3:
        return None
    t_frac = max(0.0, t_final - n_periods * period)
    return _MonodromyPlan(
        dt=period / steps, steps_per_period=steps, n_periods=n_periods, t_frac=t_frac
    )


def _tail_run(rhs, y: np.ndarray, t_frac: float, dt: float):
    if t_frac <= dt * 1e-9:
        return y
    _, samples = _rk4_run(rhs, y, t_frac, dt, store_every=0)
    return samples[-1]


def _final_kets(src: _HSource, y: np.ndarray, t_final: float, cfg: IntegratorConfig):
    """Final (dim, batch) ket block, via the periodic shortcut when valid."""
    rhs = _KetRHS(src, y.shape[1])
    plan = _monodromy_plan(src, cfg, t_final)
    if plan is None:
        if cfg.method == "adaptive":
            _, cols = _adaptive_run(rhs, y, t_final, cfg)
        else:
            dt = _resolve_dt(src, cfg, t_final)
            _, cols = _rk4_run(rhs, y, t_final, dt, store_every=0)
        return cols[-1]
    eye = np.eye(src.dim, dtype=complex)
    _, cols = _rk4_run(rhs, eye.copy(), plan.period, plan.dt, store_every=0)
    u_period = cols[-1]
    u_total = np.linalg.matrix_power(u_period, plan.n_periods)
    return _tail_run(rhs, u_total @ y, plan.t_frac, plan.dt)


def _final_matrices(src: _HSource, jumps, y: np.ndarray, t_final: float,
                    cfg: IntegratorConfig):
    """Final (batch, dim, dim) block of master-equation propagation."""
    d = src.dim
    plan = _monodromy_plan(src, cfg, t_final)
    if plan is None:
        rhs = _DensityRHS(src, jumps, y.shape[0])
        if cfg.method == "adaptive":
            _, blocks = _adaptive_run(rhs, y, t_final, cfg)
        else:
            dt = _resolve_dt(src, cfg, t_final)
            _, blocks = _rk4_run(rhs, y, t_final, dt, store_every=0)
        return blocks[-1]
    # one-period superoperator from the full matrix-unit basis
    basis = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            basis[i * d + j, i, j] = 1.0
    rhs_full = _DensityRHS(src, jumps, d * d)
    _, blocks = _rk4_run(rhs_full, basis, plan.period, plan.dt, store_every=0)
    s_period = blocks[-1].reshape(d * d, d * d).T
    s_total = np.linalg.matrix_power(s_period, plan.n_periods)
    y_vec = (s_total @ y.reshape(y.shape[0], d * d).T).T.reshape(y.shape)
    rhs = _DensityRHS(src, jumps, y.shape[0])
    return _tail_run(rhs, np.ascontiguousarray(y_vec), plan.t_frac, plan.dt)


def unitary_channel_samples(h, cmap: CompSubspaceMap, t_gate: float,
                            cfg: IntegratorConfig | None = None,
                            n_samples: int = 40):
    """Jump-free channel at equally spaced times across the gate window.

    Returns ``(times, [ProcessMap, ...])``; the last sample sits at
    ``t_gate``.
    """
    cfg = cfg or IntegratorConfig()
    src = _HSource(h)
    if cmap.space.dim != src.dim:
        raise ValueError("subspace map does not live on the Hamiltonian's space")
    if cfg.method != "rk4":
        raise IntegrationError("time-resolved channel sampling requires the fixed-step method")
    ix = cmap.index_array()
    dsub = cmap.dim
    y = np.zeros((src.dim, dsub), dtype=complex)
    for j in range(dsub):
        y[ix[j], j] = 1.0
    dt = _resolve_dt(src, cfg, t_gate)
    n_steps = max(1, math.ceil(t_gate / dt - 1e-9))
    store_every = max(1, n_steps // max(1, n_samples))
    rhs = _KetRHS(src, dsub)
    times, cols = _rk4_run(rhs, y, t_gate, dt, store_every)
    maps = []
    for t, col in zip(times, cols):
        drift = float(np.max(np.abs(np.linalg.norm(col, axis=0) - 1.0)))
        maps.append(ProcessMap.from_block_unitary(col[ix, :], t_gate=float(t), drift=drift))
    return times, maps


def extract_channel(h, jumps, cmap: CompSubspaceMap, t_gate: float,
                    cfg: IntegratorConfig | None = None) -> ProcessMap:
    """Quantum channel induced on the computational subspace.

    Without jump operators the 2^n computational basis kets are propagated
    and the map is ``A -> (P U P^dag) A (P U P^dag)^dag``.  With jumps,
    the diagonal matrix units and the upper-triangular matrix units are
    propagated through the (linear) master equation -- 36 evolutions for
    three qubits -- and the remaining columns follow from the generator's
    conjugation symmetry ``E(A^dag) = E(A)^dag``.
    """
    cfg = cfg or IntegratorConfig()
    src = _HSource(h)
    dim = src.dim
    if cmap.space.dim != dim:
        raise ValueError("subspace map does not live on the Hamiltonian's space")
    ix = cmap.index_array()
    dsub = cmap.dim

    if not jumps:
        y = np.zeros((dim, dsub), dtype=complex)
        for j in range(dsub):
            y[ix[j], j] = 1.0
        final = _final_kets(src, y, t_gate, cfg)
        _check_finite(final)
        drift = float(np.max(np.abs(np.linalg.norm(final, axis=0) - 1.0)))
        w = final[ix, :]
        return ProcessMap.from_block_unitary(w, t_gate=t_gate, drift=drift)

    pairs = _unit_pairs(dsub)
    batch = len(pairs)
    y = np.zeros((batch, dim, dim), dtype=complex)
    for b, (i, j) in enumerate(pairs):
        y[b, ix[i], ix[j]] = 1.0
    final = _final_matrices(src, jumps, y, t_gate, cfg)
    _check_finite(final)
    drift = float(np.max(np.abs([np.trace(final[b]) - 1.0 for b in range(dsub)])))
    s = np.zeros((dsub**2, dsub**2), dtype=complex)
    for b, (i, j) in enumerate(pairs):
        image = final[b][np.ix_(ix, ix)]
        s[:, i * dsub + j] = image.reshape(-1)
        if i != j:
            s[:, j * dsub + i] = image.conj().T.reshape(-1)
    return ProcessMap(superoperator=s, dim=dsub, t_gate=t_gate, drift=drift)
