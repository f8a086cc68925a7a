"""One-constant director states with boundary defects on annular sectors.

On the sector 0 <= phi <= 2*pi/N the director angle of an equilibrium with
corner defects is harmonic, and splits into a rotation term a0*phi plus
combinations of four canonical harmonic functions carrying unit or linear
data on one circle and zero on the other three edges.  This module builds
those states, sums their separated-variable series, evaluates the
normalized energies in closed form, and cross-checks them with a direct
two-dimensional quadrature of the Dirichlet energy over the sector with
the defect cores removed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np


KINDS = ("U1", "U2", "U3", "D")


class InvalidTiling(ValueError):
    """State kind cannot tile the full annulus at this sector count."""


class QuadratureBudget(RuntimeError):
    """Energy quadrature failed its self-consistency refinement check."""


class SlowConvergence(UserWarning):
    """Series truncation did not reach the requested tail bound."""


@dataclass(frozen=True)
class SeriesTruncation:
    """Number of series terms plus the guaranteed tail bound at mid-annulus."""

    n_terms: int
    tail_bound: float

    @classmethod
    def for_geometry(cls, N: int, b: float, tol: float = 1e-10) -> "SeriesTruncation":
        """Pick n_terms so exp(-(N/2)*n*|log b|)/n drops below tol."""
        rate = 0.5 * N * abs(math.log(b))
        n = 1
        while math.exp(-rate * n) / n > tol:
            n += 1
            if n > 2_000_000:
                raise ValueError("series truncation tolerance unreachable")
        return cls(n_terms=n, tail_bound=math.exp(-rate * n) / n)


@dataclass(frozen=True)
class DefectStateSpec:
    """Defect arrangement on a sector: rotation a0 plus canonical weights.

    ``coefficients`` is (a0, a1, a2, a3, a4); ``corner_strengths`` lists the
    defect strengths at the corners in the order (inner phi=0, outer phi=0,
    outer phi=2pi/N, inner phi=2pi/N).
    """

    kind: str
    N: int
    coefficients: tuple
    corner_strengths: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.N < 1:
            raise ValueError("sector count must be positive")
        if len(self.coefficients) != 5 or len(self.corner_strengths) != 4:
            raise ValueError("need 5 coefficients and 4 corner strengths")


def state_coefficients(kind: str, N: int, full_annulus: bool = True) -> DefectStateSpec:
    """Coefficients (a0..a4) and corner strengths for one of the four states.

    Boundary matching fixes a1 and a3 to +-pi/2 (tangent offsets on the two
    circles), a2 = a4 = 1 - a0, and a0 in {(N+2)/2, (2-N)/2, 1} through the
    angle offset at the straight edge.  The per-kind signs place the +1
    defects: on the inner circle (U1), outer circle (U2), the phi = 0 edge
    (U3) or diagonally (D); they are pinned by matching the bulk rotation
    coefficient and the cross-term split of the closed-form energies, with
    the 2-D quadrature as the arbiter.  The canonical-function parts of U1
    and U2 are exact negatives, which is why their normalized energies
    share one series combination and differ only in the rotation term.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown state kind {kind!r}")
    if N < 1:
        raise ValueError("sector count must be positive")
    if full_annulus and kind in ("U3", "D") and N % 2 == 1:
        raise InvalidTiling(f"{kind} tiles the annulus only for even N "
                            "(odd N would superpose opposite defects)")
    half_pi = 0.5 * math.pi
    if kind == "U1":
        a0 = 0.5 * (N + 2)
        a1, a3 = half_pi, half_pi
        corners = (1, -1, -1, 1)
    elif kind == "U2":
        a0 = 0.5 * (2 - N)
        a1, a3 = -half_pi, -half_pi
        corners = (-1, 1, 1, -1)
    elif kind == "U3":
        a0 = 1.0
        a1, a3 = -half_pi, half_pi
        corners = (1, 1, -1, -1)
    else:  # D
        a0 = 1.0
        a1, a3 = half_pi, half_pi
        corners = (1, -1, 1, -1)
    a2 = a4 = 1.0 - a0
    return DefectStateSpec(kind=kind, N=N,
                           coefficients=(a0, a1, a2, a3, a4),
                           corner_strengths=corners)


# ---------------------------------------------------------------------------
# canonical harmonic functions: separated-variable series


def _series_terms(i: int, N: int, b: float, n: np.ndarray):
    """Angular wavenumbers q and coefficients of the n-th series term."""
    if i in (1, 3):
        q = 0.5 * (2 * n - 1) * N
        coef = 4.0 / ((2 * n - 1) * math.pi)
    else:
        q = 0.5 * n * N
        coef = 4.0 * (-1.0) ** (n + 1) / (N * n)
    return q, coef


def canonical_f(i: int, N: int, b: float, r, phi,
                trunc: Optional[SeriesTruncation] = None):
    """Partial series sum of the i-th canonical harmonic function.

    i = 1: data 1 on the outer circle; i = 2: data phi on the outer circle;
    i = 3: data 1 on the inner circle; i = 4: data phi on the inner circle;
    all vanish on the other three edges.  Emits :class:`SlowConvergence`
    when the final retained term still exceeds the truncation tail bound,
    which happens near the corners where the boundary data jumps.
    """
    if i not in (1, 2, 3, 4):
        raise ValueError("canonical index must be 1..4")
    if trunc is None:
        trunc = SeriesTruncation.for_geometry(N, b)
    r_arr, phi_arr = np.broadcast_arrays(np.asarray(r, dtype=float),
                                         np.asarray(phi, dtype=float))
    u = np.log(r_arr)
    x = math.log(b)
    n = np.arange(1, trunc.n_terms + 1)
    q, coef = _series_terms(i, N, b, n)
    qu = np.multiply.outer(u, q)
    if i in (1, 2):
        radial = (np.exp(np.multiply.outer(2.0 * x - u, q)) - np.exp(qu)) \
            / np.expm1(2.0 * x * q)
    else:
        radial = (np.exp(np.multiply.outer(x - u, q))
                  - np.exp(np.multiply.outer(x + u, q))) / (-np.expm1(2.0 * x * q))
    angular = np.sin(np.multiply.outer(phi_arr, q))
    terms = coef * angular * radial
    out = terms.sum(axis=-1)
    last = np.max(np.abs(terms[..., -1]))
    if last > trunc.tail_bound * 1.001:
        warnings.warn(f"series tail {last:.2e} above bound {trunc.tail_bound:.2e} "
                      "(evaluation too close to a corner)", SlowConvergence,
                      stacklevel=2)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# exact evaluation by reflections: the angular series have closed forms,
# and expanding the radial denominators geometrically turns each canonical
# function into a fast image sum over reflected log-radii


def _cexpm1(a, c):
    """exp(a + i c) - 1 without cancellation for small arguments."""
    return (np.expm1(a) * np.cos(c) - 2.0 * np.sin(0.5 * c) ** 2) \
        + 1j * (np.exp(a) * np.sin(c))


def _kernel_odd(m: float, v, phi, grad: bool):
    """Sum over odd harmonics: (4/pi) Im artanh(e^{m(v+i phi)})."""
    if not grad:
        ev = np.exp(m * v)
        return (2.0 / math.pi) * np.arctan2(2.0 * ev * np.sin(m * phi),
                                            -np.expm1(2.0 * m * v))
    wm1 = _cexpm1(m * v, m * phi)
    wp1 = -_cexpm1(m * v, m * phi - math.pi)
    g = (wm1 + 1.0) / (-wm1 * wp1)
    scale = 4.0 * m / math.pi
    return scale * g.imag, scale * g.real


def _kernel_linear(m: float, v, phi, grad: bool):
    """Sum over all harmonics with 1/n weights: (2/m) Im log(1 + w)."""
    wp1 = -_cexpm1(m * v, m * phi - math.pi)
    if not grad:
        return (2.0 / m) * np.arctan2(wp1.imag, wp1.real)
    g = (wp1 - 1.0) / wp1
    return 2.0 * g.imag, 2.0 * g.real


def canonical_f_exact(i: int, N: int, b: float, r, phi):
    """Canonical harmonic function through the reflection representation.

    Mathematically identical to the converged series but accurate at any
    interior point, arbitrarily close to the boundary.
    """
    vals = _images(N, b, np.log(np.asarray(r, dtype=float)),
                   np.asarray(phi, dtype=float), grad=False)
    out = vals[i - 1]
    return float(out) if np.ndim(out) == 0 else out


def _images(N: int, b: float, u, phi, grad: bool):
    """All four canonical functions (and gradients) by image summation.

    Returns [f1, f2, f3, f4] or, with ``grad``, ([f*_u], [f*_phi]); image
    contributions decay like b**(N*j), so the loop terminates quickly.
    """
    m = 0.5 * N
    x = math.log(b)
    u, phi = np.broadcast_arrays(np.asarray(u, dtype=float),
                                 np.asarray(phi, dtype=float))
    shape = u.shape
    if grad:
        acc_u = [np.zeros(shape) for _ in range(4)]
        acc_p = [np.zeros(shape) for _ in range(4)]
    else:
        acc = [np.zeros(shape) for _ in range(4)]
    j_cap = max(16, int(80.0 / max(N * abs(x), 1e-3)) + 4)
    for j in range(j_cap):
        args = (u + 2.0 * j * x,            # direct, type 1/2
                2.0 * (j + 1) * x - u,      # reflected, type 1/2
                (2.0 * j + 1) * x - u,      # direct, type 3/4
                u + (2.0 * j + 1) * x)      # reflected, type 3/4
        if not grad:
            k1 = [_kernel_odd(m, a, phi, False) for a in args]
            k2 = [_kernel_linear(m, a, phi, False) for a in args]
            inc = 0.0
            for out, pos, neg in ((acc[0], k1[0], k1[1]), (acc[1], k2[0], k2[1]),
                                  (acc[2], k1[2], k1[3]), (acc[3], k2[2], k2[3])):
                term = pos - neg
                out += term
                inc = max(inc, float(np.max(np.abs(term))))
        else:
            k1 = [_kernel_odd(m, a, phi, True) for a in args]
            k2 = [_kernel_linear(m, a, phi, True) for a in args]
            inc = 0.0
            # d/du of a reflected argument carries a sign flip
            for idx, (pos, neg) in enumerate(((k1[0], k1[1]), (k2[0], k2[1]),
                                              (k1[2], k1[3]), (k2[2], k2[3]))):
                du = pos[0] + neg[0] if idx < 2 else -(pos[0] + neg[0])
                dp = pos[1] - neg[1]
                acc_u[idx] += du
                acc_p[idx] += dp
                inc = max(inc, float(np.max(np.abs(du))),
                          float(np.max(np.abs(dp))))
        if j >= 1 and inc < 1e-15:
            break
    if grad:
        return acc_u, acc_p
    return acc


def director(spec: DefectStateSpec, b: float, r, phi):
    """Director angle a0*phi + sum a_i f_i at the given polar points."""
    a0, a1, a2, a3, a4 = spec.coefficients
    u = np.log(np.asarray(r, dtype=float))
    phi_arr = np.asarray(phi, dtype=float)
    f = _images(spec.N, b, u, phi_arr, grad=False)
    out = a0 * phi_arr + a1 * f[0] + a2 * f[1] + a3 * f[2] + a4 * f[3]
    return float(out) if np.ndim(out) == 0 else out


def director_gradient(spec: DefectStateSpec, b: float, r, phi):
    """(d theta/d log r, d theta/d phi) of the state at polar points."""
    a0, a1, a2, a3, a4 = spec.coefficients
    u = np.log(np.asarray(r, dtype=float))
    phi_arr = np.asarray(phi, dtype=float)
    fu, fp = _images(spec.N, b, u, phi_arr, grad=True)
    theta_u = a1 * fu[0] + a2 * fu[1] + a3 * fu[2] + a4 * fu[3]
    theta_p = a0 + a1 * fp[0] + a2 * fp[1] + a3 * fp[2] + a4 * fp[3]
    return theta_u, theta_p


# ---------------------------------------------------------------------------
# closed-form energies


def series_s(i: int, N: int, b: float) -> float:
    """Edge-interaction sums entering the normalized energies.

    Four exponentially convergent sums of coth/csch combinations; all are
    negative for 0 < b < 1 and vanish as b -> 0.
    """
    if i not in (1, 2, 3, 4):
        raise ValueError("series index must be 1..4")
    logb = math.log(b)
    total = 0.0
    for n in range(1, 400_000):
        k = (2 * n - 1) if i in (1, 2) else n
        x = 0.5 * N * k * logb
        sh = math.sinh(x)
        if i in (1, 3):
            term = 8.0 * (math.exp(x) / sh) / k
        else:
            term = 8.0 / sh / k
        total += term
        if abs(term) < 1e-18 * max(1.0, abs(total)):
            break
    return total


def normalized_energy(kind: str, N: int, b: float) -> float:
    """Finite part of the one-constant energy after removing the core logs."""
    if kind not in KINDS:
        raise ValueError(f"unknown state kind {kind!r}")
    logb = math.log(b)
    log_inv_b = -logb
    if kind in ("U1", "U2"):
        s_combo = (series_s(1, N, b) + series_s(4, N, b)
                   - series_s(2, N, b) - series_s(3, N, b)) / 4.0
        sign = 1.0 if kind == "U1" else -1.0
        rot = (N + sign * 2) ** 2 / (4.0 * N)
        return s_combo + rot * log_inv_b + 0.5 * math.log(b / N ** 2)
    if kind == "U3":
        s_combo = -(series_s(1, N, b) + series_s(2, N, b)) / 4.0
    else:  # D
        s_combo = (series_s(2, N, b) - series_s(1, N, b)) / 4.0
    return s_combo + log_inv_b / N + 0.5 * math.log(16.0 * b / N ** 2)


def total_energy(kind: str, N: int, b: float, eps: float, K: float = 1.0) -> float:
    """Regularized sector energy K*pi*(log(1/eps) + normalized energy).

    The contributions of the removed core arcs are of order eps and are
    dropped, matching the closed-form normalization.
    """
    if not 0.0 < eps < b / 4.0:
        raise ValueError("core radius must lie in (0, b/4)")
    return K * math.pi * (math.log(1.0 / eps) + normalized_energy(kind, N, b))


def crossover_N(b: float, N_max: int) -> Optional[int]:
    """Smallest even sector count where the diagonal state undercuts U2."""
    if N_max < 2:
        raise ValueError("N_max must be at least 2")
    for N in range(2, N_max + 1, 2):
        if normalized_energy("D", N, b) < normalized_energy("U2", N, b):
            return N
    return None


# ---------------------------------------------------------------------------
# independent 2-D quadrature of the Dirichlet energy


def _gauss_panel(lo, hi, order):
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return mid + half * x, half * w


def _corner_patch(corner, e1, e2, rho_min, size, n_psi, n_s, grad_fn):
    """Integral over the quarter square at a corner minus the core disk.

    Polar coordinates about the corner with a logarithmic radial variable;
    the octants are integrated separately because the square's outer
    boundary has a slope break on the diagonal.
    """
    total = 0.0
    for psi_lo, psi_hi in ((0.0, 0.25 * math.pi), (0.25 * math.pi, 0.5 * math.pi)):
        psi, wpsi = _gauss_panel(psi_lo, psi_hi, n_psi)
        r_outer = size / np.maximum(np.cos(psi), np.sin(psi))
        smax = np.log(r_outer / rho_min)
        s_ref, ws_ref = np.polynomial.legendre.leggauss(n_s)
        s = 0.5 * (s_ref[None, :] + 1.0) * smax[:, None]
        ws = 0.5 * ws_ref[None, :] * smax[:, None]
        rho = rho_min * np.exp(s)
        u_pts = corner[0] + rho * (np.cos(psi)[:, None] * e1[0]
                                   + np.sin(psi)[:, None] * e2[0])
        p_pts = corner[1] + rho * (np.cos(psi)[:, None] * e1[1]
                                   + np.sin(psi)[:, None] * e2[1])
        gu, gp = grad_fn(u_pts.ravel(), p_pts.ravel())
        dens = 0.5 * (gu ** 2 + gp ** 2).reshape(rho.shape)
        inner = np.sum(dens * rho * rho * ws, axis=1)
        total += float(np.sum(inner * wpsi))
    return total


def _rect_integral(u_lo, u_hi, p_lo, p_hi, panel, order, grad_fn):
    """Tensor Gauss quadrature of the energy density over a rectangle."""
    if u_hi <= u_lo or p_hi <= p_lo:
        return 0.0
    nu = max(1, int(math.ceil((u_hi - u_lo) / panel)))
    np_ = max(1, int(math.ceil((p_hi - p_lo) / panel)))
    total = 0.0
    for iu in range(nu):
        ua, ub = (u_lo + (u_hi - u_lo) * iu / nu,
                  u_lo + (u_hi - u_lo) * (iu + 1) / nu)
        xu, wu = _gauss_panel(ua, ub, order)
        for ip in range(np_):
            pa, pb = (p_lo + (p_hi - p_lo) * ip / np_,
                      p_lo + (p_hi - p_lo) * (ip + 1) / np_)
            xp, wp = _gauss_panel(pa, pb, order)
            uu, pp = np.meshgrid(xu, xp, indexing="ij")
            gu, gp = grad_fn(uu.ravel(), pp.ravel())
            dens = 0.5 * (gu ** 2 + gp ** 2).reshape(uu.shape)
            total += float(np.einsum("i,j,ij->", wu, wp, dens))
    return total


def _oracle_level(spec, b, eps, n_psi, n_s, order, panel_div):
    big_t = -math.log(b)
    big_phi = 2.0 * math.pi / spec.N
    size = min(big_t, big_phi) / 3.0
    rho_out = eps
    rho_in = eps / b
    if max(rho_out, rho_in) >= 0.5 * size:
        raise ValueError("core radius too large for the sector geometry")

    def grad_fn(u, phi):
        return director_gradient(spec, b, np.exp(np.asarray(u)), phi)

    corners = (
        ((-big_t, 0.0), (1.0, 0.0), (0.0, 1.0), rho_in),
        ((0.0, 0.0), (-1.0, 0.0), (0.0, 1.0), rho_out),
        ((0.0, big_phi), (-1.0, 0.0), (0.0, -1.0), rho_out),
        ((-big_t, big_phi), (1.0, 0.0), (0.0, -1.0), rho_in),
    )
    total = 0.0
    for corner, e1, e2, rho in corners:
        total += _corner_patch(corner, e1, e2, rho, size, n_psi, n_s, grad_fn)
    panel = size / panel_div
    total += _rect_integral(-big_t + size, -size, 0.0, big_phi,
                            panel, order, grad_fn)
    total += _rect_integral(-size, 0.0, size, big_phi - size,
                            panel, order, grad_fn)
    total += _rect_integral(-big_t, -big_t + size, size, big_phi - size,
                            panel, order, grad_fn)
    return total


def energy_quadrature_oracle(spec: DefectStateSpec, b: float, eps: float) -> float:
    """Dirichlet energy (1/2)|grad theta|^2 over the sector minus core disks.

    Conformal log-radius coordinates flatten the sector to a rectangle and
    leave the Dirichlet density invariant; the removed quarter-disks of
    physical radius ``eps`` become quarter-disks of radius eps (outer) and
    eps/b (inner) up to relative O(eps), consistent with dropping the arc
    terms.  Two refinement levels must agree, otherwise
    :class:`QuadratureBudget` is raised.  Independent of the closed-form
    energy expressions.
    """
    if not 0.0 < eps < b / 4.0:
        raise ValueError("core radius must lie in (0, b/4)")
    coarse = _oracle_level(spec, b, eps, n_psi=20, n_s=36, order=10, panel_div=2)
    fine = _oracle_level(spec, b, eps, n_psi=30, n_s=54, order=14, panel_div=3)
    if abs(fine - coarse) > max(1e-5 * abs(fine), 1e-7):
        raise QuadratureBudget(f"levels disagree: {coarse!r} vs {fine!r}")
    return fine
