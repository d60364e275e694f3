"""Model parameters, spinor fields, potentials, gauge maps, and observable
functionals for the two-component spin-orbit-coupled condensate.

The governing equations couple two complex fields through a spin-orbit term
i*k0*dx (opposite signs per component), a Rabi/Raman coupling omega/2, a
detuning +-delta/2, and cubic cross/self interactions beta_jl.  Every
functional has a lab-frame and a tilde-frame (gauge-transformed) realization
selected by `Params.frame`: the tilde frame trades the first-derivative
spin-orbit term for an oscillatory exp(+-2i*k0*x) factor on the Raman term.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid

HARMONIC = "harmonic"
BOX = "box"
FREE = "free"

LAB = "lab"
TILDE = "tilde"

_GAMMA_NAMES = ("gamma_x", "gamma_y", "gamma_z")


@dataclass(frozen=True)
class Params:
    """Physical coefficients of the coupled equations (dimensionless units).

    beta21 = beta12 is enforced by construction: only beta12 is stored.
    """

    k0: float = 0.0
    omega: float = 0.0
    delta: float = 0.0
    beta11: float = 0.0
    beta12: float = 0.0
    beta22: float = 0.0
    gamma_x: float = 1.0
    gamma_y: float = 1.0
    gamma_z: float = 1.0
    potential: str = HARMONIC
    frame: str = LAB

    def __post_init__(self):
        if self.potential not in (HARMONIC, BOX, FREE):
            raise ValueError(f"unknown potential {self.potential!r}")
        if self.frame not in (LAB, TILDE):
            raise ValueError(f"unknown frame {self.frame!r}")

    @property
    def beta21(self) -> float:
        return self.beta12

    def beta_matrix(self) -> np.ndarray:
        return np.array([[self.beta11, self.beta12], [self.beta12, self.beta22]])

    def gammas(self, dim: int):
        return tuple(getattr(self, _GAMMA_NAMES[i]) for i in range(dim))

    def with_(self, **kw) -> "Params":
        return replace(self, **kw)


class Spinor:
    """Pair of complex fields sampled on a shared grid."""

    def __init__(self, grid: Grid, psi1: np.ndarray, psi2: np.ndarray):
        psi1 = np.asarray(psi1, dtype=np.complex128)
        psi2 = np.asarray(psi2, dtype=np.complex128)
        if psi1.shape != grid.shape or psi2.shape != grid.shape:
            raise ValueError(
                f"component shapes {psi1.shape}, {psi2.shape} do not match "
                f"grid shape {grid.shape}"
            )
        self.grid = grid
        self.psi1 = psi1
        self.psi2 = psi2

    def copy(self) -> "Spinor":
        return Spinor(self.grid, self.psi1.copy(), self.psi2.copy())

    def density(self) -> np.ndarray:
        return np.abs(self.psi1) ** 2 + np.abs(self.psi2) ** 2

    def norm_sq(self) -> float:
        return self.grid.quadrature(self.density())

    def normalized(self) -> "Spinor":
        s = np.sqrt(self.norm_sq())
        if s == 0.0:
            raise ValueError("cannot normalize a zero spinor")
        return Spinor(self.grid, self.psi1 / s, self.psi2 / s)

    def component_masses(self):
        n1 = self.grid.quadrature(np.abs(self.psi1) ** 2)
        n2 = self.grid.quadrature(np.abs(self.psi2) ** 2)
        return n1, n2


@dataclass
class Observables:
    """One-time-slice record of the conserved and diagnostic quantities."""

    mass: float
    mass1: float
    mass2: float
    delta_n: float
    energy: float
    chem_mu: float
    xc: np.ndarray
    momentum: np.ndarray
    raman_overlap: float


@dataclass(frozen=True)
class BandParams:
    """Rescaled coefficients of the semiclassical two-band symbol."""

    k_inf: float
    omega_inf: float
    delta_inf: float


def potential_field(params: Params, grid: Grid):
    """Per-component trap fields (V1, V2) on the grid.

    The box potential is encoded by the Dirichlet (sine) basis with V = 0
    inside, so requesting it on a Fourier grid is an error.
    """
    if params.potential == BOX:
        if not grid.is_sine:
            raise ValueError("box potential requires a sine-basis (Dirichlet) grid")
        v = np.zeros(grid.shape)
        return v, v
    if params.potential == FREE:
        v = np.zeros(grid.shape)
        return v, v
    gammas = params.gammas(grid.dim)
    if any(g <= 0 for g in gammas):
        raise ValueError(
            f"harmonic potential needs positive trap frequencies, got {gammas}"
        )
    v = np.zeros(grid.shape)
    for i, g in enumerate(gammas):
        v = v + 0.5 * g**2 * grid.coordinate(i) ** 2
    return v, v


def _raman_phase(params: Params, grid: Grid) -> np.ndarray:
    """exp(2i*k0*x) carried by the tilde-frame Raman term."""
    return np.exp(2j * params.k0 * grid.coordinate(0))


def _quartic_integral(phi: Spinor, params: Params) -> float:
    rho1 = np.abs(phi.psi1) ** 2
    rho2 = np.abs(phi.psi2) ** 2
    integrand = (
        0.5 * params.beta11 * rho1**2
        + 0.5 * params.beta22 * rho2**2
        + params.beta12 * rho1 * rho2
    )
    return phi.grid.quadrature(integrand)


def _kinetic(phi: Spinor) -> float:
    # 0.5*|grad psi|^2 integrated as -0.5*Re(conj(psi) lap psi): exact under
    # both bases (boundary terms vanish) and spectrally consistent
    g = phi.grid
    val = 0.0
    for psi in (phi.psi1, phi.psi2):
        val -= 0.5 * g.quadrature(np.real(np.conj(psi) * g.laplacian(psi)))
    return val


def energy(phi: Spinor, params: Params) -> float:
    """Energy functional in the frame selected by params.frame."""
    g = phi.grid
    v1, v2 = potential_field(params, g)
    rho1 = np.abs(phi.psi1) ** 2
    rho2 = np.abs(phi.psi2) ** 2
    val = _kinetic(phi)
    val += g.quadrature(v1 * rho1 + v2 * rho2)
    val += 0.5 * params.delta * g.quadrature(rho1 - rho2)
    val += _quartic_integral(phi, params)
    if params.frame == LAB:
        val += params.omega * np.real(g.quadrature(phi.psi1 * np.conj(phi.psi2)))
        if params.k0 != 0.0:
            t1 = g.quadrature(np.conj(phi.psi1) * g.deriv(phi.psi1, 0))
            t2 = g.quadrature(np.conj(phi.psi2) * g.deriv(phi.psi2, 0))
            val += np.real(1j * params.k0 * (t1 - t2))
    else:
        phase = _raman_phase(params, g)
        val += params.omega * np.real(
            g.quadrature(phase * phi.psi1 * np.conj(phi.psi2))
        )
    return float(val)


def energy_variant(phi: Spinor, params: Params, variant: str) -> float:
    """Reduced energy functionals used by the limit studies.

    - "no_so":          lab energy with the spin-orbit derivative term dropped
                        (the k0 = 0 functional).
    - "tilde_no_raman": tilde-frame energy without the Raman term; does not
                        depend on omega or k0.
    - "large_omega":    limiting functional of the strong-Raman regime,
                        evaluated on the first component alone:
                        int 1/2|grad phi|^2 + (V1+V2)/2 |phi|^2
                            + (b11+b22+2*b12)/4 |phi|^4.
    """
    g = phi.grid
    if variant == "no_so":
        return energy(phi, params.with_(k0=0.0, frame=LAB))
    if variant == "tilde_no_raman":
        return energy(phi, params.with_(omega=0.0, frame=TILDE))
    if variant == "large_omega":
        v1, v2 = potential_field(params, g)
        psi = phi.psi1
        rho = np.abs(psi) ** 2
        val = -0.5 * g.quadrature(np.real(np.conj(psi) * g.laplacian(psi)))
        val += g.quadrature(0.5 * (v1 + v2) * rho)
        bsum = 0.25 * (params.beta11 + params.beta22 + 2.0 * params.beta12)
        val += bsum * g.quadrature(rho**2)
        return float(val)
    raise ValueError(f"unknown energy variant {variant!r}")


def chemical_potential(phi: Spinor, params: Params) -> float:
    """Lagrange multiplier of the norm constraint: E plus the quartic integral."""
    return energy(phi, params) + _quartic_integral(phi, params)


def raman_overlap(phi: Spinor, params: Params) -> float:
    """Re int psi1 conj(psi2) (lab) or Re int e^{2ik0x} psi1 conj(psi2) (tilde)."""
    g = phi.grid
    if params.frame == LAB:
        return float(np.real(g.quadrature(phi.psi1 * np.conj(phi.psi2))))
    phase = _raman_phase(params, g)
    return float(np.real(g.quadrature(phase * phi.psi1 * np.conj(phi.psi2))))


def observables(phi: Spinor, params: Params) -> Observables:
    """All one-slice observables: masses, energy, mu, x_c, momentum, overlap."""
    g = phi.grid
    n1, n2 = phi.component_masses()
    rho = phi.density()
    xc = np.array([g.quadrature(g.coordinate(i) * rho) for i in range(g.dim)])
    mom = np.zeros(g.dim)
    for i in range(g.dim):
        val = 0.0
        for psi in (phi.psi1, phi.psi2):
            val += g.quadrature(np.imag(np.conj(psi) * g.deriv(psi, i)))
        mom[i] = val
    return Observables(
        mass=n1 + n2,
        mass1=n1,
        mass2=n2,
        delta_n=n1 - n2,
        energy=energy(phi, params),
        chem_mu=chemical_potential(phi, params),
        xc=xc,
        momentum=mom,
        raman_overlap=raman_overlap(phi, params),
    )


def apply_hamiltonian(phi: Spinor, params: Params) -> Spinor:
    """Euler-Lagrange operator H(phi) applied to phi in the active frame."""
    g = phi.grid
    v1, v2 = potential_field(params, g)
    rho1 = np.abs(phi.psi1) ** 2
    rho2 = np.abs(phi.psi2) ** 2
    h1 = (-0.5 * g.laplacian(phi.psi1)
          + (v1 + 0.5 * params.delta
             + params.beta11 * rho1 + params.beta12 * rho2) * phi.psi1)
    h2 = (-0.5 * g.laplacian(phi.psi2)
          + (v2 - 0.5 * params.delta
             + params.beta12 * rho1 + params.beta22 * rho2) * phi.psi2)
    if params.frame == LAB:
        if params.k0 != 0.0:
            h1 = h1 + 1j * params.k0 * g.deriv(phi.psi1, 0)
            h2 = h2 - 1j * params.k0 * g.deriv(phi.psi2, 0)
        h1 = h1 + 0.5 * params.omega * phi.psi2
        h2 = h2 + 0.5 * params.omega * phi.psi1
    else:
        phase = _raman_phase(params, g)
        h1 = h1 + 0.5 * params.omega * np.conj(phase) * phi.psi2
        h2 = h2 + 0.5 * params.omega * phase * phi.psi1
    return Spinor(g, h1, h2)


def eigen_residual(phi: Spinor, params: Params, mu: float | None = None) -> float:
    """Discrete L2 norm of H(phi)phi - mu*phi (mu defaults to chemical_potential)."""
    if mu is None:
        mu = chemical_potential(phi, params)
    h = apply_hamiltonian(phi, params)
    r1 = h.psi1 - mu * phi.psi1
    r2 = h.psi2 - mu * phi.psi2
    g = phi.grid
    return float(np.sqrt(g.quadrature(np.abs(r1) ** 2 + np.abs(r2) ** 2)))


def gauge_transform(phi: Spinor, params: Params, direction: str) -> Spinor:
    """Multiply by e^{-+ik0 x} / e^{+-ik0 x}: 'to_tilde' or 'to_lab'."""
    x = phi.grid.coordinate(0)
    if direction == "to_tilde":
        f1, f2 = np.exp(-1j * params.k0 * x), np.exp(1j * params.k0 * x)
    elif direction == "to_lab":
        f1, f2 = np.exp(1j * params.k0 * x), np.exp(-1j * params.k0 * x)
    else:
        raise ValueError(f"unknown gauge direction {direction!r}")
    return Spinor(phi.grid, f1 * phi.psi1, f2 * phi.psi2)


def reduce_dimension(g11: float, g12: float, g22: float,
                     gamma_y: float, gamma_z: float, target_d: int):
    """3D interaction constants -> effective beta_jl in target dimension."""
    if target_d == 3:
        factor = 1.0
    elif target_d == 2:
        factor = np.sqrt(gamma_z / (2.0 * np.pi))
    elif target_d == 1:
        factor = np.sqrt(gamma_y * gamma_z) / (2.0 * np.pi)
    else:
        raise ValueError(f"target dimension must be 1, 2 or 3, got {target_d}")
    return factor * g11, factor * g12, factor * g22


@dataclass(frozen=True)
class Nondimensionalized:
    """Dimensionless parameters plus the scales used to produce them."""

    params: Params
    g11: float
    g12: float
    g22: float
    x_s: float
    t_s: float
    omega0: float


def nondimensionalize(mass: float, omega_x: float, omega_y: float, omega_z: float,
                      a11: float, a12: float, a22: float, n_atoms: float,
                      k0_raman: float, detuning: float, rabi: float,
                      hbar: float = 1.054571817e-34) -> Nondimensionalized:
    """Convert physical trap/scattering inputs to dimensionless Params.

    Scales: omega0 = min trap frequency, t_s = 1/omega0, x_s = sqrt(hbar/(m*omega0)).
    Returned Params carry the 3D couplings beta_jl = g_jl = 4*pi*N*a_jl/x_s;
    apply `reduce_dimension` for quasi-2D/1D geometries.
    """
    if mass <= 0:
        raise ValueError("particle mass must be positive")
    if min(omega_x, omega_y, omega_z) <= 0:
        raise ValueError("trap frequencies must be positive")
    if n_atoms <= 0:
        raise ValueError("atom number must be positive")
    omega0 = min(omega_x, omega_y, omega_z)
    t_s = 1.0 / omega0
    x_s = np.sqrt(hbar / (mass * omega0))
    g11 = 4.0 * np.pi * n_atoms * a11 / x_s
    g12 = 4.0 * np.pi * n_atoms * a12 / x_s
    g22 = 4.0 * np.pi * n_atoms * a22 / x_s
    params = Params(
        k0=k0_raman * x_s / 2.0,
        omega=rabi / omega0,
        delta=detuning / omega0,
        beta11=g11,
        beta12=g12,
        beta22=g22,
        gamma_x=omega_x / omega0,
        gamma_y=omega_y / omega0,
        gamma_z=omega_z / omega0,
    )
    return Nondimensionalized(params, g11, g12, g22, float(x_s), t_s, omega0)


def uniqueness_indicator(params: Params, grid: Grid):
    """Indicator field I(x) = (V1-V2+delta)^2 + (b11-b12)^2 + (b12-b22)^2.

    Returns (field, flag); flag is True when I is not identically zero, the
    condition under which the omega = 0 ground state is unique up to phase.
    """
    v1, v2 = potential_field(params, grid)
    field = (
        (v1 - v2 + params.delta) ** 2
        + (params.beta11 - params.beta12) ** 2
        + (params.beta12 - params.beta22) ** 2
    )
    return field, bool(np.any(field != 0.0))


def band_eigenvalues(xi, band: BandParams, v1: float, v2: float):
    """Semiclassical band symbol eigenvalues at phase-space point (x, xi).

    lambda_{1,2} = |xi|^2/2 + (V1+V2)/2
                   +- 0.5*sqrt((V1-V2+2*k_inf*xi_1+delta_inf)^2 + omega_inf^2),
    returned as (lambda1, lambda2) with lambda1 >= lambda2.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    base = 0.5 * np.sum(xi**2) + 0.5 * (v1 + v2)
    gap = v1 - v2 + 2.0 * band.k_inf * xi[0] + band.delta_inf
    half = 0.5 * np.hypot(gap, band.omega_inf)
    return float(base + half), float(base - half)


def existence_conditions(params: Params, dim: int, c_b: float | None = None):
    """Ground-state existence warnings from the interaction matrix.

    Implements the known sufficient (existence) and violation (non-existence)
    conditions per dimension.  The 2D thresholds need the best Sobolev
    constant, which has no closed form here: they are checked only when the
    caller supplies `c_b`.  Returns a list of warning strings (empty = no
    condition violated / nothing checkable failed).
    """
    b11, b12, b22 = params.beta11, params.beta12, params.beta22
    warnings = []
    if dim == 1:
        return warnings
    if dim == 3:
        nonneg = b11 >= 0 and b12 >= 0 and b22 >= 0
        spd = b11 >= 0 and b22 >= 0 and b11 * b22 >= b12**2
        if b11 < 0 or b22 < 0 or (b12 < 0 and b12**2 > b11 * b22):
            warnings.append(
                "no 3D ground state exists for this interaction matrix "
                f"(beta = {b11}, {b12}, {b22})"
            )
        elif not (nonneg or spd):
            warnings.append(
                "3D existence not guaranteed: interaction matrix is neither "
                "nonnegative nor semi-positive definite"
            )
        return warnings
    if dim == 2:
        if c_b is None:
            return warnings
        if b11 < -c_b or b22 < -c_b:
            warnings.append(
                f"no 2D ground state: a self-interaction is below -C_b = {-c_b}"
            )
        elif b12 < -c_b - np.sqrt(max(c_b + b11, 0.0) * max(c_b + b22, 0.0)):
            warnings.append(
                "no 2D ground state: cross interaction below the C_b threshold"
            )
        return warnings
    raise ValueError(f"dimension must be 1, 2 or 3, got {dim}")
