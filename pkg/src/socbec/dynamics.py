"""Real-time evolution by second-order operator splitting.

Lab frame / periodic truncation: time-splitting Fourier pseudospectral (TSFP)
stepping.  The kinetic + spin-orbit + detuning + Raman block is diagonalized
per Fourier mode: with chi = k0*mu_x - delta/2 and
lambda = sqrt(4*chi^2 + omega^2)/2, the mode symbol

    A = [[|mu|^2/2 - chi, omega/2], [omega/2, |mu|^2/2 + chi]]

has eigenvalues |mu|^2/2 +- lambda and the half-step flow exp(-i*(tau/2)*A)
is applied in closed form.  The trap/nonlinear phase step is exact because it
leaves the densities unchanged.  Strang order: spectral half, pointwise full,
spectral half.

Tilde frame / box potential: three-part splitting on a sine (Dirichlet) grid
- kinetic/detuning half (diagonal in sine space), trap/nonlinear phase half,
exact Raman rotation over the full step, then the halves in reverse.  The
rotation solves i dt psi1 = (omega/2) e^{-2ik0x} psi2 (and conjugate) exactly:

    R(tau) = cos(omega*tau/2) I - i sin(omega*tau/2) [[0, e^{-2ik0x}],
                                                      [e^{2ik0x}, 0]],

which preserves the pointwise total density.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid
from .model import LAB, TILDE, Params, Spinor, observables, potential_field


@dataclass
class EvolveOptions:
    tau: float
    t_end: float
    record_every: int = 1
    snapshot_every: int = 0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


class ModePropagator:
    """Per-mode half-step propagator table for the lab-frame spectral block.

    Entries m11/m12/m22 are the closed-form symmetric unitary
    Q^T e^{-i(tau/4) U} Q advancing the mode ODE by tau/2; chi, lam, the
    orthogonal factor Q and the diagonal phases are retained for inspection.
    For omega = 0 the table degenerates to decoupled diagonal phases and Q is
    not constructed (its printed entries divide by lambda -+ chi).
    """

    def __init__(self, grid: Grid, params: Params, tau: float):
        if not grid.is_fourier:
            raise ValueError("mode propagators require a Fourier grid")
        if params.frame != LAB:
            raise ValueError("mode propagators implement the lab-frame block")
        if tau == 0.0:
            raise ValueError("tau must be nonzero")
        self.grid = grid
        self.tau = float(tau)
        self.key = (params.k0, params.omega, params.delta)
        mu2 = grid.mu2
        mux = grid.mu(0) * np.ones(grid.shape)
        chi = params.k0 * mux - 0.5 * params.delta
        self.chi = chi
        omega = params.omega
        if omega != 0.0:
            lam = 0.5 * np.sqrt(4.0 * chi**2 + omega**2)
            self.lam = lam
            ep = np.exp(-0.25j * tau * (mu2 + 2.0 * lam))
            em = np.exp(-0.25j * tau * (mu2 - 2.0 * lam))
            self.phases = (ep, em)
            self.m11 = ((lam - chi) * ep + (lam + chi) * em) / (2.0 * lam)
            self.m22 = ((lam + chi) * ep + (lam - chi) * em) / (2.0 * lam)
            self.m12 = omega * (ep - em) / (4.0 * lam)
            # rows of Q are the +-lambda eigenvectors; the off-diagonal
            # entries are rewritten via omega/2 = sgn(omega) sqrt(lam^2-chi^2)
            # so nothing divides by lam -+ chi
            sp = np.sqrt((lam + chi) / (2.0 * lam))
            sm = np.sqrt((lam - chi) / (2.0 * lam))
            sgn = np.sign(omega)
            self.q = np.stack([
                np.stack([sm, sgn * sp], axis=0),
                np.stack([-sp, sgn * sm], axis=0),
            ], axis=0)
        else:
            self.lam = np.abs(chi)
            ep = np.exp(-0.25j * tau * (mu2 - 2.0 * chi))
            em = np.exp(-0.25j * tau * (mu2 + 2.0 * chi))
            self.phases = (ep, em)
            self.m11 = ep
            self.m22 = em
            self.m12 = None
            self.q = None

    def apply(self, c1: np.ndarray, c2: np.ndarray):
        """Advance spectral coefficients by tau/2 of the linear block."""
        if self.m12 is None:
            return self.m11 * c1, self.m22 * c2
        return (self.m11 * c1 + self.m12 * c2,
                self.m12 * c1 + self.m22 * c2)


def build_mode_propagators(grid: Grid, params: Params, tau: float) -> ModePropagator:
    """Propagator table over all Fourier modes for one (grid, params, tau)."""
    return ModePropagator(grid, params, tau)


def _nonlinear_phase(psi1, psi2, v1, v2, params: Params, dt: float):
    """Exact trap/nonlinear phase flow over dt (densities are invariant)."""
    rho1 = np.abs(psi1) ** 2
    rho2 = np.abs(psi2) ** 2
    p1 = v1 + params.beta11 * rho1 + params.beta12 * rho2
    p2 = v2 + params.beta12 * rho1 + params.beta22 * rho2
    return psi1 * np.exp(-1j * dt * p1), psi2 * np.exp(-1j * dt * p2)


def tsfp_step(psi: Spinor, params: Params, propagators: ModePropagator,
              tau: float) -> Spinor:
    """One Strang step: spectral half, full nonlinear phase, spectral half."""
    if propagators.grid != psi.grid:
        raise ValueError("propagator table was built for a different grid")
    if propagators.tau != tau:
        raise ValueError(
            f"propagator table was built for tau={propagators.tau}, got {tau}"
        )
    if propagators.key != (params.k0, params.omega, params.delta):
        raise ValueError("propagator table was built for different params")
    g = psi.grid
    v1, v2 = potential_field(params, g)
    c1, c2 = propagators.apply(g.forward(psi.psi1), g.forward(psi.psi2))
    p1, p2 = g.inverse(c1), g.inverse(c2)
    p1, p2 = _nonlinear_phase(p1, p2, v1, v2, params, tau)
    c1, c2 = propagators.apply(g.forward(p1), g.forward(p2))
    return Spinor(g, g.inverse(c1), g.inverse(c2))


@dataclass
class BoxRotation:
    """Exact Raman rotation cache for the tilde-frame splitting.

    r12/r21 carry the -i sin(omega*tau/2) e^{-+2ik0x} off-diagonal factors;
    the per-node mixing matrix is unitary, so |psi1|^2 + |psi2|^2 is
    preserved at every node.
    """

    grid: Grid
    tau: float
    key: tuple
    cos_half: float
    r12: np.ndarray
    r21: np.ndarray
    phase: np.ndarray = field(repr=False, default=None)

    def apply(self, psi1, psi2):
        return (self.cos_half * psi1 + self.r12 * psi2,
                self.r21 * psi1 + self.cos_half * psi2)

    def t_matrices(self) -> np.ndarray:
        """Unitary diagonalizer T(x) of the coupling, shape (2,2)+grid.shape."""
        ones = np.ones(self.grid.shape)
        p = self.phase  # e^{-2ik0x}
        s = 1.0 / np.sqrt(2.0)
        return np.stack([
            np.stack([s * ones, s * p], axis=0),
            np.stack([-s * ones, s * p], axis=0),
        ], axis=0)


def build_box_rotation(grid: Grid, params: Params, tau: float) -> BoxRotation:
    x = grid.coordinate(0)
    phase = np.exp(-2j * params.k0 * x)
    half = 0.5 * params.omega * tau
    s = -1j * np.sin(half)
    return BoxRotation(
        grid=grid, tau=float(tau), key=(params.k0, params.omega),
        cos_half=float(np.cos(half)), r12=s * phase, r21=s * np.conj(phase),
        phase=phase,
    )


def _tilde_kinetic_phases(grid: Grid, params: Params, dt: float):
    """Diagonal spectral phases of the tilde kinetic/detuning flow over dt."""
    mu2 = grid.mu2
    e1 = np.exp(-1j * dt * (0.5 * mu2 + 0.5 * params.delta))
    e2 = np.exp(-1j * dt * (0.5 * mu2 - 0.5 * params.delta))
    return e1, e2


def _tilde_strang_step(psi: Spinor, params: Params, tau: float,
                       rotation: BoxRotation, kin_phases, v1, v2) -> Spinor:
    """kinetic/2, phase/2, rotation, phase/2, kinetic/2 on any basis."""
    g = psi.grid
    e1, e2 = kin_phases
    p1 = g.inverse(e1 * g.forward(psi.psi1))
    p2 = g.inverse(e2 * g.forward(psi.psi2))
    p1, p2 = _nonlinear_phase(p1, p2, v1, v2, params, 0.5 * tau)
    p1, p2 = rotation.apply(p1, p2)
    p1, p2 = _nonlinear_phase(p1, p2, v1, v2, params, 0.5 * tau)
    p1 = g.inverse(e1 * g.forward(p1))
    p2 = g.inverse(e2 * g.forward(p2))
    return Spinor(g, p1, p2)


def box_step(psi: Spinor, params: Params, tau: float,
             rotation: BoxRotation | None = None) -> Spinor:
    """One tilde-frame Strang step on a sine grid (box truncation)."""
    if not psi.grid.is_sine:
        raise ValueError("box_step requires a sine-basis grid")
    if params.frame != TILDE:
        raise ValueError("box_step runs in the tilde frame")
    g = psi.grid
    if rotation is None:
        rotation = build_box_rotation(g, params, tau)
    elif rotation.grid != g or rotation.tau != tau or \
            rotation.key != (params.k0, params.omega):
        raise ValueError("rotation cache does not match this step")
    v1, v2 = potential_field(params, g)
    kin = _tilde_kinetic_phases(g, params, 0.5 * tau)
    return _tilde_strang_step(psi, params, tau, rotation, kin, v1, v2)


@dataclass
class TrajectorySeries:
    """Time-indexed observable records plus optional field snapshots.

    final_state holds the state at the last completed step (the last good
    state when the run aborted on non-finite values).
    """

    times: np.ndarray
    records: list
    snapshots: list = field(default_factory=list)
    aborted: bool = False
    final_state: Spinor | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def xc(self) -> np.ndarray:
        return np.stack([r.xc for r in self.records])

    @property
    def momentum(self) -> np.ndarray:
        return np.stack([r.momentum for r in self.records])


def evolve(psi0: Spinor, params: Params, options: EvolveOptions,
           observer=None) -> TrajectorySeries:
    """Step from t=0 to t_end, recording observables every record_every steps.

    The stepper is picked from the frame/basis: lab frame on a Fourier grid
    uses TSFP; tilde frame on a sine grid uses the box splitting.  Non-finite
    values abort the run; the series keeps the records up to the last good
    state and is flagged `aborted`.
    """
    g = psi0.grid
    n_steps = int(round(options.t_end / options.tau))
    if abs(n_steps * options.tau - options.t_end) > 1e-9 * max(1.0, options.t_end):
        raise ValueError("t_end must be an integer multiple of tau")

    if params.frame == LAB:
        prop = build_mode_propagators(g, params, options.tau)

        def stepper(s):
            return tsfp_step(s, params, prop, options.tau)
    else:
        if not g.is_sine:
            raise ValueError("tilde-frame evolution runs on a sine grid")
        rot = build_box_rotation(g, params, options.tau)
        kin = _tilde_kinetic_phases(g, params, 0.5 * options.tau)
        v1, v2 = potential_field(params, g)

        def stepper(s):
            return _tilde_strang_step(s, params, options.tau, rot, kin, v1, v2)

    times = [0.0]
    records = [observables(psi0, params)]
    snapshots = []
    if options.snapshot_every:
        snapshots.append((0.0, psi0.copy()))
    if observer is not None:
        observer(0.0, psi0, records[0])

    last_good = psi0
    aborted = False
    for step in range(1, n_steps + 1):
        psi = stepper(last_good)
        t = step * options.tau
        if not (np.all(np.isfinite(psi.psi1)) and np.all(np.isfinite(psi.psi2))):
            aborted = True
            break
        last_good = psi
        record_now = step % options.record_every == 0 or step == n_steps
        if record_now:
            rec = observables(psi, params)
            times.append(t)
            records.append(rec)
            if observer is not None:
                observer(t, psi, rec)
        if options.snapshot_every and (step % options.snapshot_every == 0
                                       or step == n_steps):
            snapshots.append((t, psi.copy()))

    return TrajectorySeries(
        times=np.array(times), records=records, snapshots=snapshots,
        aborted=aborted, final_state=last_good,
    )
