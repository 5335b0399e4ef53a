"""Independent eigenvalue oracle: shooting integration of the differential
systems across [-x0, x0].

The systems are regular on the closed interval (the singular points sit at
x = +-1, outside), so classical fixed-step RK4 is used; fixed steps keep
the Richardson error estimate clean.  State magnitudes are renormalized
jointly at checkpoints if they threaten to overflow, which rescales the
boundary residual without moving its zeros.

For k != 0, two trajectories started from (Psi, Psi', Phi, Phi') =
(0, 0, 1, 0) and (0, 0, 0, 1) span the solutions obeying the left boundary
conditions; the residual is the 2x2 determinant of their (Psi, Psi') values
at +x0.  For k = 0 a single trajectory from (Psi, Psi', Phi) = (0, 0, 1)
suffices and the residual is Psi'(x0); the second-order equation for the
transformed variable chi uses (chi, chi') = (0, 1) and residual chi(x0).

Only the real spectrum is validated here; complex roots are validated by
residual magnitude in the rootfinder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NonFiniteError, SpectralParams
from .rootfinder import ScanConfig, scan_real_roots

RENORM_THRESHOLD = 1e100
RENORM_CHECK_EVERY = 100


@dataclass(frozen=True)
class ShootResidual:
    """Right-boundary residual of the shooting integration.

    value is the (renormalized) residual; log_scale the log10 factor taken
    out by renormalization; richardson_error compares against a run with
    half the number of steps.
    """

    value: complex
    step_count: int
    richardson_error: float
    log_scale: float = 0.0


def _integrate(rhs, y0, x0, n_steps):
    """RK4 for a stacked complex state of shape (dim, n) from -x0 to x0.

    Returns (final state, per-column log10 renormalization factors).
    """
    y = y0.astype(complex)
    scale = np.zeros(y.shape[1])
    h = 2.0 * x0 / n_steps
    x = -x0
    for i in range(n_steps):
        k1 = rhs(x, y)
        k2 = rhs(x + h / 2, y + (h / 2) * k1)
        k3 = rhs(x + h / 2, y + (h / 2) * k2)
        k4 = rhs(x + h, y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        x += h
        if (i + 1) % RENORM_CHECK_EVERY == 0:
            mags = np.abs(y).max(axis=0)
            big = mags > RENORM_THRESHOLD
            if np.any(big):
                factor = np.where(big, mags, 1.0)
                y = y / factor
                scale += np.log10(factor)
    if not np.all(np.isfinite(y)):
        raise NonFiniteError("shooting state became non-finite")
    return y, scale


def _rhs_k(k2, eps, mu):
    def rhs(x, y):
        om = 1.0 - x * x
        out = np.empty_like(y)
        out[0] = y[1]
        out[1] = (y[2] + 2 * x * y[1] + k2 * y[0] / om) / om
        out[2] = y[3]
        out[3] = (mu * y[2] + (2 * x - eps) * y[3] + k2 * y[2] / om) / om
        return out
    return rhs


def _rhs_k0(eps, mu):
    def rhs(x, y):
        om = 1.0 - x * x
        out = np.empty_like(y)
        out[0] = y[1]
        out[1] = (y[2] + 2 * x * y[1]) / om
        out[2] = mu * y[1] - eps * y[2] / om
        return out
    return rhs


def _rhs_chi(eps, mu):
    def rhs(x, y):
        om = 1.0 - x * x
        out = np.empty_like(y)
        out[0] = y[1]
        out[1] = (mu * y[0] + 2 * x * y[1]
                  + (eps * eps + 4 + 4 * eps * x) * y[0] / (4 * om)) / om
        return out
    return rhs


def _shoot_k_values(k2, eps, x0, s, n_steps):
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    mu = -s * (s + 1)
    rhs = _rhs_k(k2, eps, mu)
    n = s.size
    y1 = np.zeros((4, n), dtype=complex)
    y1[2] = 1.0
    y2 = np.zeros((4, n), dtype=complex)
    y2[3] = 1.0
    r1, sc1 = _integrate(rhs, y1, x0, n_steps)
    r2, sc2 = _integrate(rhs, y2, x0, n_steps)
    return r1[0] * r2[1] - r1[1] * r2[0], sc1 + sc2


def _shoot_k0_values(eps, x0, s, n_steps):
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    mu = -s * (s + 1)
    y = np.zeros((3, s.size), dtype=complex)
    y[2] = 1.0
    r, sc = _integrate(_rhs_k0(eps, mu), y, x0, n_steps)
    return r[1], sc


def _shoot_chi_values(eps, x0, s, n_steps):
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    mu = -s * (s + 1)
    y = np.zeros((2, s.size), dtype=complex)
    y[1] = 1.0
    r, sc = _integrate(_rhs_chi(eps, mu), y, x0, n_steps)
    return r[0], sc


def _check_domain(x0):
    if not 0 < x0 < 1:
        raise ValueError(f"shooting requires 0 < x0 < 1, got {x0}")


def _with_richardson(values_fn, s, n_steps):
    v, sc = values_fn(s, n_steps)
    v_half, sc_half = values_fn(s, max(2, n_steps // 2))
    # RK4: halving the step cuts the error ~16x, so the difference between
    # the two runs is ~15x the fine-run error
    err = abs(v[0] * 10.0 ** sc[0] - v_half[0] * 10.0 ** sc_half[0]) / 15.0
    return ShootResidual(complex(v[0]), n_steps, float(err), float(sc[0]))


def shoot_k(params: SpectralParams, s: complex,
            n_steps: int = 2000) -> ShootResidual:
    """Boundary residual of the k != 0 system at spectral coordinate s."""
    if params.k == 0:
        raise ValueError("shoot_k requires k != 0")
    _check_domain(params.x0)
    k2 = params.abs_k ** 2

    def values(sv, n):
        return _shoot_k_values(k2, params.eps, params.x0, sv, n)

    return _with_richardson(values, np.array([s]), n_steps)


def shoot_k0(params: SpectralParams, s: complex,
             n_steps: int = 2000) -> ShootResidual:
    """Boundary residual of the k = 0 system at s (mu != 0 required)."""
    if params.k != 0:
        raise ValueError("shoot_k0 requires k = 0")
    _check_domain(params.x0)
    if s * (s + 1) == 0:
        raise ValueError("mu = 0 is the trivial eigenvalue")

    def values(sv, n):
        return _shoot_k0_values(params.eps, params.x0, sv, n)

    return _with_richardson(values, np.array([s]), n_steps)


def shoot_chi(eps: float, x0: float, s: complex,
              n_steps: int = 2000) -> ShootResidual:
    """Boundary residual chi(x0) of the transformed self-adjoint problem
    with Dirichlet conditions chi(+-x0) = 0."""
    _check_domain(x0)

    def values(sv, n):
        return _shoot_chi_values(eps, x0, sv, n)

    return _with_richardson(values, np.array([s]), n_steps)


def shoot_functional(params: SpectralParams, n_steps: int = 2000,
                     which: str = "auto"):
    """Vectorized residual functional for the root finder.

    which: "auto" picks the k != 0 or k = 0 system from params; "chi"
    selects the transformed self-adjoint problem (params.k ignored).
    """
    _check_domain(params.x0)
    if which == "chi":
        return lambda s: _shoot_chi_values(params.eps, params.x0, s, n_steps)[0]
    if which != "auto":
        raise ValueError(f"which must be 'auto' or 'chi', got {which!r}")
    if params.k == 0:
        return lambda s: _shoot_k0_values(params.eps, params.x0, s, n_steps)[0]
    k2 = params.abs_k ** 2
    return lambda s: _shoot_k_values(k2, params.eps, params.x0, s, n_steps)[0]


def oracle_roots(shoot, cfg: ScanConfig) -> list:
    """Real roots of a shooting residual functional on the scan interval.

    Same contract as scan_real_roots; roots are tagged source="oracle".
    """
    return scan_real_roots(shoot, cfg, source="oracle")
