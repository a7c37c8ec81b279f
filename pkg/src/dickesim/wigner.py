"""Wigner quasi-probability functions.

Spherical: the multipole expansion for a spin J = N/2,

    W(theta, phi) = sqrt((2J+1)/(4*pi)) * sum_{k=0}^{2J} sum_{q=-k}^{k}
                    Tr(T_kq^dag rho) Y_kq(theta, phi),

with irreducible tensor operators T_kq built from Clebsch-Gordan
coefficients, normalized so that the integral over the sphere is 1 and the
maximally mixed state is flat at 1/(4*pi).

Planar: the standard bosonic Wigner function of the state obtained by
reading Dicke amplitudes as Fock amplitudes.  This identification ignores
the actual emission dynamics and is an approximation; every planar result
is labeled ``dicke-to-fock-identification``.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

try:
    from scipy.special import sph_harm_y as _sph_harm_y

    def _sph_harm(k: int, q: int, theta, phi):
        return _sph_harm_y(k, q, theta, phi)
except ImportError:  # scipy < 1.15
    from scipy.special import sph_harm as _sph_harm_legacy

    def _sph_harm(k: int, q: int, theta, phi):
        return _sph_harm_legacy(q, k, phi, theta)

from .core import DickeSpace, QuantumState

PLANAR_APPROXIMATION_LABEL = "dicke-to-fock-identification"
BOUNDARY_WARN_LEVEL = 1e-3


class WindowWarning(UserWarning):
    """The planar grid window clips non-negligible Wigner weight."""


def _lgfac(n) -> float:
    return math.lgamma(n + 1)


@functools.lru_cache(maxsize=None)
def _fac(n: int) -> int:
    return math.factorial(n)


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float,
                   J: float, M: float) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>.

    Racah formula with log-scaled prefactor; the alternating sum, which
    cancels catastrophically in floating point at large j, is carried out
    exactly over the integers.  Invalid quantum numbers (triangle rule,
    M != m1+m2, half-integer mismatches) return 0.0 by convention.
    """
    t = {}
    for name, val in (("j1", j1), ("m1", m1), ("j2", j2), ("m2", m2),
                      ("J", J), ("M", M)):
        tv = round(2 * val)
        if abs(2 * val - tv) > 1e-9:
            return 0.0
        t[name] = int(tv)
    tj1, tm1, tj2, tm2, tJ, tM = (t["j1"], t["m1"], t["j2"], t["m2"], t["J"], t["M"])
    if tM != tm1 + tm2:
        return 0.0
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tJ + tM) % 2:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0.0
    if tJ < abs(tj1 - tj2) or tJ > tj1 + tj2 or (tj1 + tj2 + tJ) % 2:
        return 0.0

    def f(tx: int) -> float:  # log((tx/2)!) for doubled integers
        return _lgfac(tx // 2)

    log_pref = 0.5 * (
        math.log(tJ + 1.0)
        + f(tJ + tj1 - tj2) + f(tJ - tj1 + tj2) + f(tj1 + tj2 - tJ)
        - f(tj1 + tj2 + tJ + 2)
        + f(tJ + tM) + f(tJ - tM)
        + f(tj1 - tm1) + f(tj1 + tm1)
        + f(tj2 - tm2) + f(tj2 + tm2)
    )
    k_min = max(0, (tj2 - tJ - tm1) // 2, (tj1 - tJ + tm2) // 2)
    k_max = min((tj1 + tj2 - tJ) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    if k_max < k_min:
        return 0.0
    # factorial arguments per term; scale by their maxima so every term is
    # an exact integer and the alternating sum loses no precision
    args = [
        lambda k: k,
        lambda k: (tj1 + tj2 - tJ) // 2 - k,
        lambda k: (tj1 - tm1) // 2 - k,
        lambda k: (tj2 + tm2) // 2 - k,
        lambda k: (tJ - tj2 + tm1) // 2 + k,
        lambda k: (tJ - tj1 - tm2) // 2 + k,
    ]
    ks = range(k_min, k_max + 1)
    maxima = [max(a(k) for k in ks) for a in args]
    log_scale = sum(_lgfac(m) for m in maxima)
    total = 0
    for k in ks:
        term = 1
        for a, mx in zip(args, maxima):
            term *= _fac(mx) // _fac(a(k))
        total += -term if k % 2 else term
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    # log of a (possibly huge) exact integer, then back to floats
    log_total = math.log(-total if total < 0 else total)
    return sign * math.exp(log_pref - log_scale + log_total)


@functools.lru_cache(maxsize=None)
def _multipole_bands(space: DickeSpace):
    """Nonzero elements of every T_kq for the space.

    T_kq = sum_{m} (-1)^(J - M_m) <J, M_m + q; J, -M_m | k q> |m+q><m| with
    M_m = m - J, which is Hilbert-Schmidt orthonormal.  Returns a list of
    (k, q, cols, rows, values) with real values.
    """
    n = space.n_emitters
    j2 = n  # 2J
    bands = []
    for k in range(n + 1):
        for q in range(-k, k + 1):
            cols = np.arange(max(0, -q), min(n, n - q) + 1)
            rows = cols + q
            vals = np.array([
                (-1.0) ** (j2 - m) * clebsch_gordan(
                    n / 2, (2 * (m + q) - j2) / 2,
                    n / 2, -(2 * m - j2) / 2,
                    k, q)
                for m in cols
            ])
            bands.append((k, q, cols, rows, vals))
    return bands


def spherical_tensor(space: DickeSpace, k: int, q: int) -> np.ndarray:
    """Dense matrix of the irreducible tensor operator T_kq."""
    if not (0 <= k <= space.n_emitters) or abs(q) > k:
        raise ValueError(f"invalid multipole indices k={k}, q={q}")
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    for bk, bq, cols, rows, vals in _multipole_bands(space):
        if bk == k and bq == q:
            mat[rows, cols] = vals
            break
    return mat


def multipole_coefficients(state: QuantumState) -> dict:
    """rho_kq = Tr(T_kq^dag rho) for all (k, q)."""
    rho = state.to_density()
    out = {}
    for k, q, cols, rows, vals in _multipole_bands(state.space):
        out[(k, q)] = complex(np.dot(vals, rho[rows, cols]))
    return out


def spherical_wigner_values(state: QuantumState, thetas, phis) -> np.ndarray:
    """W evaluated at arbitrary (theta, phi) points (broadcast together)."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    coeffs = multipole_coefficients(state)
    j2 = state.space.n_emitters
    acc = np.zeros(np.broadcast(thetas, phis).shape, dtype=complex)
    for (k, q), rho_kq in coeffs.items():
        if abs(rho_kq) < 1e-300:
            continue
        acc = acc + rho_kq * _sph_harm(k, q, thetas, phis)
    scale = np.sqrt((j2 + 1) / (4 * np.pi))
    vals = scale * acc
    imag = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
    if imag > 1e-8:
        raise AssertionError(f"spherical Wigner came out non-real ({imag:.3e})")
    return vals.real


@dataclass(frozen=True)
class SphereGrid:
    """W sampled on a uniform midpoint grid over the sphere.

    theta_j = (j + 1/2) * pi / n_theta, phi_k = k * 2*pi / n_phi.  The
    quadrature weights (one per theta row, including the sin(theta) factor
    and the phi cell width) integrate trigonometric polynomials of degree
    < n_theta exactly, so sum(weights * row_sums) recovers the integral of
    W over the sphere.
    """

    thetas: np.ndarray
    phis: np.ndarray
    values: np.ndarray
    quadrature_weights: np.ndarray

    @property
    def n_theta(self) -> int:
        return self.thetas.size

    @property
    def n_phi(self) -> int:
        return self.phis.size

    def integral(self) -> float:
        return float(self.quadrature_weights @ self.values.sum(axis=1))


def _theta_weights(n_theta: int) -> np.ndarray:
    """Fejer-type weights for int_0^pi f(theta) sin(theta) dtheta at midpoints."""
    thetas = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    w = np.full(n_theta, 2.0 / n_theta)
    ls = np.arange(2, n_theta, 2)
    if ls.size:
        w = w + (4.0 / n_theta) * np.cos(np.outer(thetas, ls)) @ (1.0 / (1.0 - ls ** 2))
    return w


def spherical_wigner(state: QuantumState, n_theta: int = 0, n_phi: int = 0) -> SphereGrid:
    """Sample W on the default (or requested) sphere grid.

    Exploits the separable structure Y_kq(theta, phi) = Y_kq(theta, 0) e^(iq phi)
    so the harmonics are only evaluated along the theta axis.
    """
    n = state.space.n_emitters
    if n_theta <= 0:
        n_theta = max(60, n + 2)
    if n_phi <= 0:
        n_phi = max(120, 2 * n + 2)
    thetas = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    phis = np.arange(n_phi) * 2 * np.pi / n_phi
    coeffs = multipole_coefficients(state)
    j2 = state.space.n_emitters
    # S_q(theta) = sum_k rho_kq Y_kq(theta, 0), then W = sum_q S_q e^(iq phi)
    s_q = np.zeros((2 * j2 + 1, n_theta), dtype=complex)
    for (k, q), rho_kq in coeffs.items():
        if abs(rho_kq) < 1e-300:
            continue
        s_q[q + j2] += rho_kq * _sph_harm(k, q, thetas, 0.0)
    phase = np.exp(1j * np.outer(np.arange(-j2, j2 + 1), phis))
    vals = np.sqrt((j2 + 1) / (4 * np.pi)) * (s_q.T @ phase)
    imag = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
    if imag > 1e-8:
        raise AssertionError(f"spherical Wigner came out non-real ({imag:.3e})")
    weights = _theta_weights(n_theta) * (2 * np.pi / n_phi)
    return SphereGrid(thetas, phis, vals.real, weights)


@dataclass(frozen=True)
class PlaneGrid:
    """Planar Wigner samples on a rectangular (x, p) grid, x along axis 0."""

    xs: np.ndarray
    ps: np.ndarray
    values: np.ndarray
    approximation: str = PLANAR_APPROXIMATION_LABEL
    window_clipped: bool = False

    def integral(self) -> float:
        dx = self.xs[1] - self.xs[0]
        dp = self.ps[1] - self.ps[0]
        return float(self.values.sum() * dx * dp)


def _planar_kernel_sum(amps: np.ndarray, X: np.ndarray, P: np.ndarray) -> np.ndarray:
    """W(x,p) = sum_{m,n} c_m conj(c_n) K_mn(alpha), alpha = (x+ip)/sqrt(2)."""
    alpha = (X + 1j * P) / np.sqrt(2)
    aa = np.abs(alpha) ** 2
    envelope = np.exp(-2.0 * aa) / np.pi
    four_aa = 4.0 * aa
    dim = amps.size
    w = np.zeros_like(aa)
    # off-diagonal magnitude via logs to dodge overflow in (2|alpha|)^(n-m)
    with np.errstate(divide="ignore"):
        log2a = np.log(2.0 * np.sqrt(aa))
    phase = np.exp(1j * np.angle(alpha))
    for m in range(dim):
        cm = amps[m]
        if cm == 0:
            continue
        w += (abs(cm) ** 2 * (-1.0) ** m) * envelope * eval_genlaguerre(m, 0, four_aa)
        for n in range(m + 1, dim):
            rho_mn = cm * np.conj(amps[n])
            if rho_mn == 0:
                continue
            k = n - m
            logmag = 0.5 * (gammaln(m + 1) - gammaln(n + 1)) + k * log2a - 2.0 * aa
            mag = np.exp(logmag)  # 0 where alpha == 0 (logmag = -inf there)
            kern = ((-1.0) ** m / np.pi) * mag * phase ** k * eval_genlaguerre(m, k, four_aa)
            w += 2.0 * np.real(rho_mn * kern)
    return w


def planar_wigner(state: QuantumState, x_max: float = 0.0, p_max: float = 0.0,
                  resolution: int = 201) -> PlaneGrid:
    """Bosonic Wigner function of the Fock-identified pure state.

    Conventions: x = (a + a^dag)/sqrt(2), W >= -1/pi, integral over the
    plane equals 1 for a window enclosing the state.  Emits a
    :class:`WindowWarning` (and flags the grid) when |W| at the window
    boundary exceeds ``BOUNDARY_WARN_LEVEL``.
    """
    if not state.is_pure:
        raise ValueError("planar_wigner expects a pure state")
    n = state.space.n_emitters
    if x_max <= 0:
        x_max = np.sqrt(2.0 * n) + 3.0
    if p_max <= 0:
        p_max = x_max
    xs = np.linspace(-x_max, x_max, resolution)
    ps = np.linspace(-p_max, p_max, resolution)
    values = _planar_kernel_sum(state.amplitudes, xs[:, None], ps[None, :])
    edge = max(np.max(np.abs(values[0, :])), np.max(np.abs(values[-1, :])),
               np.max(np.abs(values[:, 0])), np.max(np.abs(values[:, -1])))
    clipped = bool(edge > BOUNDARY_WARN_LEVEL)
    if clipped:
        warnings.warn(
            f"planar window edge still carries |W| = {edge:.3e}; enlarge x_max/p_max",
            WindowWarning,
            stacklevel=2,
        )
    return PlaneGrid(xs, ps, values, window_clipped=clipped)


def export_grid(grid, path) -> None:
    """Write a grid as CSV: header ``theta,phi,w`` or ``x,p,w``, one row per
    sample, row-major order, shortest round-trip float formatting."""
    if isinstance(grid, SphereGrid):
        header = "theta,phi,w"
        rows = ((t, p, grid.values[i, k])
                for i, t in enumerate(grid.thetas)
                for k, p in enumerate(grid.phis))
    elif isinstance(grid, PlaneGrid):
        header = "x,p,w"
        rows = ((x, p, grid.values[i, k])
                for i, x in enumerate(grid.xs)
                for k, p in enumerate(grid.ps))
    else:
        raise TypeError(f"cannot export {type(grid).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for a, b, w in rows:
            fh.write(f"{float(a)!r},{float(b)!r},{float(w)!r}\n")


def load_grid_csv(path) -> Tuple[str, np.ndarray]:
    """Read back an exported grid; returns (header, rows as (n, 3) array)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        data = [tuple(float(tok) for tok in line.split(",")) for line in fh if line.strip()]
    return header, np.asarray(data)
