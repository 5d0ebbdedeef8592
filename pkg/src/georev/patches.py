"""Monge patches over the unit disk: energies, the unbounded-curvature graph,
cutoff flattening, and sphere inversion.

All energies use the graph formulas for a scalar height function u over a
planar domain: with p = Du and the area element sqrt(1 + |p|^2),

    H = ((1 + u_y^2) u_xx - 2 u_x u_y u_xy + (1 + u_x^2) u_yy)
        / (1 + |p|^2)^(3/2),
    K = det D^2 u / (1 + |p|^2)^2.

Quadrature is polar: trapezoid in the angle (spectral for periodic
integrands) times panelled Gauss-Legendre in the radius, with panel breaks
at any radii where the integrand loses smoothness (cutoff rings).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MongePatch",
    "CutoffSpec",
    "InversionConfig",
    "graph_energy",
    "toro_curvature",
    "toro_patch",
    "flatten_cutoff",
    "invert_points",
    "cap_height_threshold",
    "inverted_circle_length",
]


@dataclass(frozen=True)
class MongePatch:
    """Scalar graph over a disk with closed-form first and second derivatives.

    ``du`` returns (u_x, u_y); ``d2u`` returns (u_xx, u_xy, u_yy).
    """

    u: object
    du: object
    d2u: object
    radius: float = 1.0
    label: str = ""

    def finite_difference_check(self, pts, h1_rel=1e-5, h2_rel=3e-4):
        """Max relative mismatch of du/d2u against central differences at pts.

        Step sizes scale with the distance to the origin and differ for the
        two derivative orders; pick ``h2_rel`` against the size of the fourth
        derivative (smaller when it is large, before roundoff takes over).
        """
        worst = 0.0
        for x, y in pts:
            r = max(math.hypot(x, y), 1e-6)
            h = h1_rel * r
            ux, uy = (float(v) for v in self.du(x, y))
            fx = (float(self.u(x + h, y)) - float(self.u(x - h, y))) / (2 * h)
            fy = (float(self.u(x, y + h)) - float(self.u(x, y - h))) / (2 * h)
            scale = max(abs(ux), abs(uy), 1e-12)
            worst = max(worst, abs(fx - ux) / scale, abs(fy - uy) / scale)
            h = h2_rel * r
            uxx, uxy, uyy = (float(v) for v in self.d2u(x, y))
            gxx = (float(self.u(x + h, y)) - 2 * float(self.u(x, y))
                   + float(self.u(x - h, y))) / (h * h)
            gyy = (float(self.u(x, y + h)) - 2 * float(self.u(x, y))
                   + float(self.u(x, y - h))) / (h * h)
            gxy = (
                float(self.u(x + h, y + h)) - float(self.u(x + h, y - h))
                - float(self.u(x - h, y + h)) + float(self.u(x - h, y - h))
            ) / (4 * h * h)
            scale2 = max(abs(uxx), abs(uxy), abs(uyy), 1e-9)
            worst = max(
                worst,
                abs(gxx - uxx) / scale2,
                abs(gxy - uxy) / scale2,
                abs(gyy - uyy) / scale2,
            )
        return worst


def _graph_pointwise(patch, x, y):
    ux, uy = patch.du(x, y)
    uxx, uxy, uyy = patch.d2u(x, y)
    q = 1.0 + ux * ux + uy * uy
    H = ((1.0 + uy * uy) * uxx - 2.0 * ux * uy * uxy + (1.0 + ux * ux) * uyy) / q**1.5
    K = (uxx * uyy - uxy * uxy) / (q * q)
    return q, H, K


def graph_energy(patch, r_lo=0.0, r_hi=None, grid=(64, 256), panel_breaks=()):
    """(area, willmore, maxK, minK) over the disk or annulus r_lo < r < r_hi.

    ``grid`` is (radial nodes per panel, angular nodes); extra radial panel
    breaks let integrands with rings of reduced smoothness (cutoffs) stay
    spectrally accurate.  maxK/minK are taken over the quadrature nodes.
    """
    if r_hi is None:
        r_hi = patch.radius
    if not 0.0 <= r_lo < r_hi:
        raise ValueError("need 0 <= r_lo < r_hi")
    n_r, n_t = grid
    theta = np.linspace(0.0, 2.0 * math.pi, n_t, endpoint=False)
    w_t = 2.0 * math.pi / n_t
    xs, ws = np.polynomial.legendre.leggauss(n_r)
    breaks = sorted({r_lo, r_hi, *(float(b) for b in panel_breaks
                                   if r_lo < float(b) < r_hi)})
    area = 0.0
    willmore = 0.0
    maxK = -math.inf
    minK = math.inf
    ct, st = np.cos(theta), np.sin(theta)
    for a, b in zip(breaks, breaks[1:]):
        r = 0.5 * (a + b) + 0.5 * (b - a) * xs
        wr = 0.5 * (b - a) * ws
        X = r[:, None] * ct[None, :]
        Y = r[:, None] * st[None, :]
        q, H, K = _graph_pointwise(patch, X, Y)
        if np.any(~np.isfinite(q)) or np.any(~np.isfinite(H)):
            raise ValueError(
                "integrand not finite on the requested domain; exclude the "
                "singular origin with r_lo > 0"
            )
        dmu = np.sqrt(q) * r[:, None]
        area += float(np.einsum("i,ij->", wr, dmu)) * w_t
        willmore += 0.25 * float(np.einsum("i,ij->", wr, H * H * dmu)) * w_t
        maxK = max(maxK, float(np.max(K)))
        minK = min(minK, float(np.min(K)))
    return area, willmore, maxK, minK


# -- the unbounded-curvature graph u = x log |log r| ---------------------------


def toro_curvature(x, y):
    """(K, (u_x, u_y), (u_xx, u_xy, u_yy)) of u = x log|log r| for 0 < r < 1.

    The Gauss curvature blows up to +infinity along the x-axis and to
    -infinity along the y-axis as r -> 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    r = np.sqrt(r2)
    if np.any(r <= 0.0) or np.any(r >= 1.0):
        raise ValueError("domain is 0 < sqrt(x^2+y^2) < 1")
    lg = np.log(r)  # negative on the domain
    L = 1.0 / (r2 * lg)
    ux = np.log(np.abs(lg)) + x * x * L
    uy = x * y * L
    uxx = x * L * (3.0 - 2.0 * x * x / r2 - x * x * L)
    uxy = y * L * (1.0 - 2.0 * x * x / r2 - x * x * L)
    uyy = x * L * (1.0 - 2.0 * y * y / r2 - y * y * L)
    q = 1.0 + ux * ux + uy * uy
    K = (uxx * uyy - uxy * uxy) / (q * q)
    return K, (ux, uy), (uxx, uxy, uyy)


def toro_patch(radius=0.5, scale=1.0):
    """MongePatch of the rescaled graph u_s(z) = s * u(z / s) on r < radius * s."""
    s = float(scale)

    def u(x, y):
        x = np.asarray(x, dtype=float) / s
        y = np.asarray(y, dtype=float) / s
        r = np.sqrt(x * x + y * y)
        return s * x * np.log(np.abs(np.log(r)))

    def du(x, y):
        _, grad, _ = toro_curvature(np.asarray(x) / s, np.asarray(y) / s)
        return grad

    def d2u(x, y):
        _, _, hess = toro_curvature(np.asarray(x) / s, np.asarray(y) / s)
        return tuple(v / s for v in hess)

    return MongePatch(u=u, du=du, d2u=d2u, radius=radius * s, label="toro")


# -- cutoff flattening ----------------------------------------------------------


def _smoothstep(t):
    return 3.0 * t * t - 2.0 * t**3


def _smoothstep_d(t):
    return 6.0 * t - 6.0 * t * t


def _smoothstep_dd(t):
    return 6.0 - 12.0 * t


def _eta(t):
    """C^2 transition: 0 for t <= 1, 1 for t >= 2 (smoothstep of smoothstep)."""
    t = np.asarray(t, dtype=float)
    s = np.clip(t - 1.0, 0.0, 1.0)
    return _smoothstep(_smoothstep(s))


def _eta_d(t):
    t = np.asarray(t, dtype=float)
    s = np.clip(t - 1.0, 0.0, 1.0)
    inside = (t > 1.0) & (t < 2.0)
    return np.where(inside, _smoothstep_d(_smoothstep(s)) * _smoothstep_d(s), 0.0)


def _eta_dd(t):
    t = np.asarray(t, dtype=float)
    s = np.clip(t - 1.0, 0.0, 1.0)
    inside = (t > 1.0) & (t < 2.0)
    val = (
        _smoothstep_dd(_smoothstep(s)) * _smoothstep_d(s) ** 2
        + _smoothstep_d(_smoothstep(s)) * _smoothstep_dd(s)
    )
    return np.where(inside, val, 0.0)


def _eta_bound():
    t = np.linspace(0.5, 2.5, 20001)
    return float(np.max(np.abs(_eta(t)) + np.abs(_eta_d(t)) + np.abs(_eta_dd(t))))


@dataclass(frozen=True)
class CutoffSpec:
    """Radial cutoff scale delta with the fixed C^2 transition profile."""

    delta: float
    c_eta: float = field(default_factory=_eta_bound)

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")

    def eta(self, t):
        return _eta(t)

    def eta_d(self, t):
        return _eta_d(t)

    def eta_dd(self, t):
        return _eta_dd(t)


def flatten_cutoff(patch, spec):
    """The flattened patch u_delta(z) = u(z) eta(|z|/delta).

    Identically 0 on r <= delta and identical to u on r >= 2 delta; requires
    u(0) = 0 and Du(0) = 0 so that the energy perturbation scales like
    delta^2.  Derivative evaluators are assembled by the product rule.
    """
    d = spec.delta
    u0 = float(np.asarray(patch.u(0.0, 0.0)))
    g0 = [float(v) for v in patch.du(0.0, 0.0)]
    if abs(u0) > 1e-12 or max(abs(g0[0]), abs(g0[1])) > 1e-12:
        raise ValueError("flattening requires u(0) = 0 and Du(0) = 0")

    def radial(x, y):
        r = np.sqrt(np.asarray(x, dtype=float) ** 2 + np.asarray(y, dtype=float) ** 2)
        return np.maximum(r, 1e-300)

    def u_d(x, y):
        return patch.u(x, y) * spec.eta(radial(x, y) / d)

    def du_d(x, y):
        r = radial(x, y)
        e = spec.eta(r / d)
        ed = spec.eta_d(r / d) / d
        ux, uy = patch.du(x, y)
        uu = patch.u(x, y)
        nx, ny = np.asarray(x) / r, np.asarray(y) / r
        return (e * ux + uu * ed * nx, e * uy + uu * ed * ny)

    def d2u_d(x, y):
        r = radial(x, y)
        e = spec.eta(r / d)
        ed = spec.eta_d(r / d) / d
        edd = spec.eta_dd(r / d) / (d * d)
        ux, uy = patch.du(x, y)
        uxx, uxy, uyy = patch.d2u(x, y)
        uu = patch.u(x, y)
        nx, ny = np.asarray(x) / r, np.asarray(y) / r
        # D^2 eta_delta = edd n (x) n + (ed / r)(I - n (x) n)
        exx = edd * nx * nx + ed / r * (1.0 - nx * nx)
        exy = edd * nx * ny - ed / r * nx * ny
        eyy = edd * ny * ny + ed / r * (1.0 - ny * ny)
        ex, ey = ed * nx, ed * ny
        return (
            e * uxx + 2.0 * ux * ex + uu * exx,
            e * uxy + ux * ey + uy * ex + uu * exy,
            e * uyy + 2.0 * uy * ey + uu * eyy,
        )

    return MongePatch(
        u=u_d, du=du_d, d2u=d2u_d, radius=patch.radius,
        label=f"{patch.label}-flattened({d})",
    )


# -- sphere inversion ------------------------------------------------------------


@dataclass(frozen=True)
class InversionConfig:
    """I(x) = 2 lam (x + lam nu) / |x + lam nu|^2 with nu a unit vector in the
    codimension block (first two coordinates zero)."""

    lam: float
    nu: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ValueError("lam must be positive")
        nu = np.asarray(self.nu, dtype=float)
        if nu.shape[0] < 3:
            raise ValueError("ambient dimension must be at least 3")
        if abs(float(np.linalg.norm(nu)) - 1.0) > 1e-12:
            raise ValueError("nu must have unit length")
        if max(abs(nu[0]), abs(nu[1])) > 1e-12:
            raise ValueError("nu must lie in the codimension block {0}^2 x R^(n-2)")


def invert_points(pts, cfg):
    """Apply the inversion to an (m, n) array of points (exact formula)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    nu = np.asarray(cfg.nu, dtype=float)
    if pts.shape[1] != nu.shape[0]:
        raise ValueError("points and nu have mismatched ambient dimension")
    shifted = pts + cfg.lam * nu
    norm2 = np.sum(shifted * shifted, axis=1)
    bad = norm2 == 0.0
    if np.any(bad):
        idx = int(np.nonzero(bad)[0][0])
        raise ValueError(f"point {pts[idx]} coincides with the inversion center")
    return 2.0 * cfg.lam * shifted / norm2[:, None]


def cap_height_threshold(lam, delta):
    """Height |zeta| above which the image of the flat disk covers the cap."""
    return 2.0 * lam * lam / (delta * delta + lam * lam)


def inverted_circle_length(lam, delta):
    """Length of the image of the circle |z| = delta under the inversion."""
    return 4.0 * math.pi * lam * delta / (delta * delta + lam * lam)
