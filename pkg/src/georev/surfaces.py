"""Profile curves and surfaces of revolution.

A surface of revolution is generated by a profile curve (h(t), g(t)) with
h > 0 rotated about the vertical axis:

    f(u1, u2) = (h(u2) cos u1, h(u2) sin u1, g(u2)).

The induced metric is diag(h^2, gamma^2) with gamma = sqrt(h'^2 + g'^2).
Profiles are stored as piecewise closed-form evaluators so that curvatures
carry no interpolation error; pieces meet with C^1 regularity (position and
tangent direction), which keeps curvature integrals well defined even when
the second derivatives jump.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numerics import QuadratureSpec, integrate_1d

__all__ = [
    "ProfileSegment",
    "ProfileCurve",
    "RevolutionSurface",
    "PoleError",
    "CurvatureData",
    "sphere_profile",
    "cap_profile",
    "cylinder_profile",
    "catenoid_profile",
    "spheroid_profile",
    "paraboloid_profile",
    "dumbbell_profile",
    "profile_from_config",
    "unit_sphere",
    "spheroid_surface",
    "metric_at",
    "curvatures_at",
    "area_and_willmore",
    "diameter_of",
]

JOIN_TOL = 1e-10
_POLE_TOL = 1e-12


class PoleError(ValueError):
    """Curvature requested at a pole where the profile does not cap off orthogonally."""


@dataclass(frozen=True)
class ProfileSegment:
    """One closed-form piece of a profile curve on [t_lo, t_hi].

    All six evaluators must accept floats or numpy arrays.
    """

    t_lo: float
    t_hi: float
    h: Callable
    g: Callable
    dh: Callable
    dg: Callable
    d2h: Callable
    d2g: Callable
    label: str = ""
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.t_lo < self.t_hi:
            raise ValueError(f"empty segment [{self.t_lo}, {self.t_hi}]")


class ProfileCurve:
    """Ordered list of C^1-joined profile segments, oriented by increasing height."""

    def __init__(self, segments: Sequence[ProfileSegment]):
        if not segments:
            raise ValueError("profile needs at least one segment")
        self.segments = list(segments)
        self.breaks = np.array(
            [s.t_lo for s in self.segments] + [self.segments[-1].t_hi]
        )
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("segments must be ordered and non-overlapping")
        for left, right in zip(self.segments, self.segments[1:]):
            if abs(left.t_hi - right.t_lo) > JOIN_TOL:
                raise ValueError(
                    f"parameter gap between {left.label!r} and {right.label!r}"
                )
        res = self.join_residuals()
        if res and max(res) > JOIN_TOL:
            raise ValueError(f"profile joins are not C^1 (residual {max(res):.3e})")

    @property
    def t_min(self):
        return float(self.breaks[0])

    @property
    def t_max(self):
        return float(self.breaks[-1])

    def join_residuals(self):
        """Position plus unit-tangent mismatch at every interior join."""
        out = []
        for left, right in zip(self.segments, self.segments[1:]):
            t = left.t_hi
            dp = math.hypot(
                float(left.h(t)) - float(right.h(t)), float(left.g(t)) - float(right.g(t))
            )
            vl = np.array([float(left.dh(t)), float(left.dg(t))])
            vr = np.array([float(right.dh(t)), float(right.dg(t))])
            dv = np.linalg.norm(vl / np.linalg.norm(vl) - vr / np.linalg.norm(vr))
            out.append(dp + dv)
        return out

    def _segment_index(self, t):
        i = bisect_right(self.breaks, t) - 1
        return min(max(i, 0), len(self.segments) - 1)

    def _eval(self, name, t):
        if np.ndim(t) == 0:
            seg = self.segments[self._segment_index(float(t))]
            return float(getattr(seg, name)(float(t)))
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        idx = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0,
                      len(self.segments) - 1)
        for i, seg in enumerate(self.segments):
            m = idx == i
            if np.any(m):
                out[m] = getattr(seg, name)(t[m])
        return out

    def h(self, t):
        return self._eval("h", t)

    def g(self, t):
        return self._eval("g", t)

    def dh(self, t):
        return self._eval("dh", t)

    def dg(self, t):
        return self._eval("dg", t)

    def d2h(self, t):
        return self._eval("d2h", t)

    def d2g(self, t):
        return self._eval("d2g", t)

    def speed(self, t):
        return np.hypot(self.dh(t), self.dg(t))

    def dspeed(self, t):
        gam = self.speed(t)
        return (self.dh(t) * self.d2h(t) + self.dg(t) * self.d2g(t)) / gam

    def interior_breaks(self):
        return [float(b) for b in self.breaks[1:-1]]

    def config(self):
        return {"segments": [dict(s.config) for s in self.segments]}


@dataclass
class CurvatureData:
    K: float
    abs_H: float
    kappa_meridian: float
    kappa_parallel: float
    at_join: bool = False


class RevolutionSurface:
    """Immutable surface of revolution with metric, curvature, and energy helpers."""

    def __init__(self, profile: ProfileCurve, name: str = "", extra_config=None):
        self.profile = profile
        self.name = name
        h_lo = float(profile.h(profile.t_min))
        h_hi = float(profile.h(profile.t_max))
        self.closed_at_poles = (abs(h_lo) < 1e-9, abs(h_hi) < 1e-9)
        self._extra_config = dict(extra_config or {})

    # -- basic geometry ----------------------------------------------------

    @property
    def u2_range(self):
        return (self.profile.t_min, self.profile.t_max)

    @property
    def is_closed(self):
        return all(self.closed_at_poles)

    def point(self, u1, u2):
        """Ambient coordinates; broadcasts over arrays."""
        h = self.profile.h(u2)
        return np.stack(
            np.broadcast_arrays(h * np.cos(u1), h * np.sin(u1), self.profile.g(u2)),
            axis=-1,
        )

    def metric_at(self, u2):
        """(E, F, G) = (h^2, 0, gamma^2) at the profile parameter u2."""
        lo, hi = self.u2_range
        if not lo <= u2 <= hi:
            raise ValueError(f"u2={u2} outside profile domain [{lo}, {hi}]")
        h = float(self.profile.h(u2))
        gam = float(self.profile.speed(u2))
        return (h * h, 0.0, gam * gam)

    def _curvature_one_sided(self, seg, t):
        dh, dg = float(seg.dh(t)), float(seg.dg(t))
        d2h, d2g = float(seg.d2h(t)), float(seg.d2g(t))
        h = float(seg.h(t))
        gam = math.hypot(dh, dg)
        km = (dh * d2g - dg * d2h) / gam**3
        if abs(h) < _POLE_TOL:
            # Pole: the parallel curvature has a limit iff the profile meets
            # the axis orthogonally (g' -> 0 there); the limit equals the
            # meridian curvature (umbilic point).
            if abs(dg) > 1e-6 * gam:
                raise PoleError(
                    f"profile does not meet the axis orthogonally at t={t}"
                )
            kp = d2g / (dh * gam)
        else:
            kp = dg / (h * gam)
        return km, kp

    def curvatures_at(self, u2) -> CurvatureData:
        """Gauss curvature, |H| (sum of principal curvatures), and both curvatures.

        At an interior C^{1,1} join the one-sided values from the lower
        segment are returned and flagged.
        """
        u2 = float(u2)
        lo, hi = self.u2_range
        if not lo <= u2 <= hi:
            raise ValueError(f"u2={u2} outside profile domain [{lo}, {hi}]")
        prof = self.profile
        at_join = any(abs(u2 - b) < 1e-12 for b in prof.interior_breaks())
        seg = prof.segments[prof._segment_index(u2)]
        km, kp = self._curvature_one_sided(seg, u2)
        return CurvatureData(
            K=km * kp,
            abs_H=abs(km + kp),
            kappa_meridian=km,
            kappa_parallel=kp,
            at_join=at_join,
        )

    def curvature_grids(self, t):
        """Vectorized (K, H^2, h, gamma) on an array of profile parameters."""
        prof = self.profile
        t = np.asarray(t, dtype=float)
        h = prof.h(t)
        dh, dg = prof.dh(t), prof.dg(t)
        d2h, d2g = prof.d2h(t), prof.d2g(t)
        gam = np.hypot(dh, dg)
        km = (dh * d2g - dg * d2h) / gam**3
        with np.errstate(divide="ignore", invalid="ignore"):
            kp = np.where(np.abs(h) < _POLE_TOL, d2g / (dh * gam), dg / (h * gam))
        return km * kp, (km + kp) ** 2, h, gam

    # -- integral quantities -------------------------------------------------

    def area_and_willmore(self, u2_range=None, spec=None):
        """Surface area and Willmore energy over a u2 interval by 1D quadrature.

        Both reduce to profile integrals with dmu = 2 pi h gamma du2; the
        integration is split at segment joins so that each panel is smooth.
        """
        if spec is None:
            spec = QuadratureSpec()
        lo, hi = self.u2_range
        if u2_range is not None:
            lo, hi = max(lo, u2_range[0]), min(hi, u2_range[1])
            if not lo < hi:
                raise ValueError("empty integration range")
        area = 0.0
        willmore = 0.0

        for seg in self.profile.segments:
            a, b = max(lo, seg.t_lo), min(hi, seg.t_hi)
            if not a < b:
                continue

            def dA(t, _seg=seg):
                return _seg.h(t) * np.hypot(_seg.dh(t), _seg.dg(t))

            def dW(t, _seg=seg):
                dh, dg = _seg.dh(t), _seg.dg(t)
                d2h, d2g = _seg.d2h(t), _seg.d2g(t)
                h = _seg.h(t)
                gam = np.hypot(dh, dg)
                km = (dh * d2g - dg * d2h) / gam**3
                with np.errstate(divide="ignore", invalid="ignore"):
                    kp = np.where(np.abs(h) < _POLE_TOL, d2g / (dh * gam), dg / (h * gam))
                return (km + kp) ** 2 * h * gam

            area += integrate_1d(dA, a, b, spec)
            willmore += integrate_1d(dW, a, b, spec)
        return 2.0 * math.pi * area, 0.5 * math.pi * willmore

    def gauss_curvature_integral(self, u2_range=None, spec=None):
        """Integral of K dmu (2 pi times the profile integral of K h gamma)."""
        if spec is None:
            spec = QuadratureSpec()
        lo, hi = self.u2_range
        if u2_range is not None:
            lo, hi = max(lo, u2_range[0]), min(hi, u2_range[1])
        total = 0.0
        for seg in self.profile.segments:
            a, b = max(lo, seg.t_lo), min(hi, seg.t_hi)
            if not a < b:
                continue

            def dK(t, _seg=seg):
                dh, dg = _seg.dh(t), _seg.dg(t)
                d2h, d2g = _seg.d2h(t), _seg.d2g(t)
                gam = np.hypot(dh, dg)
                km = (dh * d2g - dg * d2h) / gam**3
                # K h gamma = kappa_m * dg, finite at poles
                return km * dg

            total += integrate_1d(dK, a, b, spec)
        return 2.0 * math.pi * total

    def parallel_length(self, u2):
        return 2.0 * math.pi * float(self.profile.h(u2))

    def profile_arclength(self, a, b, spec=None):
        if spec is None:
            spec = QuadratureSpec()
        total = 0.0
        for seg in self.profile.segments:
            aa, bb = max(a, seg.t_lo), min(b, seg.t_hi)
            if aa < bb:
                total += integrate_1d(
                    lambda t, _s=seg: np.hypot(_s.dh(t), _s.dg(t)), aa, bb, spec
                )
        return total

    def diameter_of(self, u2_range=None, samples=4096):
        """Sampled lower bound on the extrinsic diameter.

        By rotational symmetry an extremal pair can be taken with angular
        separation 0 or pi, so only profile-parameter pairs are searched:
        a coarse full pairwise pass locates candidate basins, which are then
        re-searched at the requested resolution.
        """
        if samples < 64:
            raise ValueError("need at least 64 samples")
        lo, hi = self.u2_range
        if u2_range is not None:
            lo, hi = max(lo, u2_range[0]), min(hi, u2_range[1])

        def pair_max(ti, tj):
            h_i = np.asarray(self.profile.h(ti))[:, None]
            g_i = np.asarray(self.profile.g(ti))[:, None]
            h_j = np.asarray(self.profile.h(tj))[None, :]
            g_j = np.asarray(self.profile.g(tj))[None, :]
            d_pi = (h_i + h_j) ** 2 + (g_i - g_j) ** 2
            d_0 = (h_i - h_j) ** 2 + (g_i - g_j) ** 2
            both = np.maximum(d_pi, d_0)
            k = int(np.argmax(both))
            return float(both.ravel()[k]), k // both.shape[1], k % both.shape[1]

        n_c = min(samples, 512)
        t_c = np.linspace(lo, hi, n_c)
        best, i_c, j_c = pair_max(t_c, t_c)
        if samples > n_c:
            span = (hi - lo) / (n_c - 1)
            n_w = max(2, 2 * samples // n_c)
            ti = np.linspace(max(lo, t_c[i_c] - span), min(hi, t_c[i_c] + span), n_w)
            tj = np.linspace(max(lo, t_c[j_c] - span), min(hi, t_c[j_c] + span), n_w)
            refined, _, _ = pair_max(ti, tj)
            best = max(best, refined)
        return math.sqrt(best)

    def scaled(self, lam, name=None):
        """The surface scaled by lam > 0 (profile reparametrized by t -> t)."""
        if lam <= 0:
            raise ValueError("scale factor must be positive")
        segs = []
        for s in self.profile.segments:
            segs.append(
                ProfileSegment(
                    s.t_lo,
                    s.t_hi,
                    h=lambda t, _s=s: lam * _s.h(t),
                    g=lambda t, _s=s: lam * _s.g(t),
                    dh=lambda t, _s=s: lam * _s.dh(t),
                    dg=lambda t, _s=s: lam * _s.dg(t),
                    d2h=lambda t, _s=s: lam * _s.d2h(t),
                    d2g=lambda t, _s=s: lam * _s.d2g(t),
                    label=s.label,
                    config={**s.config, "scaled_by": lam},
                )
            )
        return RevolutionSurface(
            ProfileCurve(segs), name=name or f"{self.name}*{lam}"
        )

    # -- export ---------------------------------------------------------------

    def sample_grid(self, n_u1=64, n_u2=64):
        """(u1, u2, x, y, z) rows sampling the surface on a regular grid."""
        u1 = np.linspace(0.0, 2.0 * math.pi, n_u1, endpoint=False)
        lo, hi = self.u2_range
        u2 = np.linspace(lo, hi, n_u2)
        rows = []
        for v in u2:
            h = float(self.profile.h(v))
            z = float(self.profile.g(v))
            for u in u1:
                rows.append((float(u), float(v), h * math.cos(u), h * math.sin(u), z))
        return rows

    def export_csv(self, path, n_u1=64, n_u2=64):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u1", "u2", "x", "y", "z"])
            for row in self.sample_grid(n_u1, n_u2):
                w.writerow([repr(v) for v in row])

    def config(self):
        cfg = {"name": self.name, "profile": self.profile.config()}
        cfg.update(self._extra_config)
        return cfg


# -- module-level operation wrappers ------------------------------------------


def metric_at(surface, u2):
    return surface.metric_at(u2)


def curvatures_at(surface, u2):
    return surface.curvatures_at(u2)


def area_and_willmore(surface, u2_range=None, spec=None):
    return surface.area_and_willmore(u2_range, spec)


def diameter_of(surface, u2_range=None, samples=4096):
    return surface.diameter_of(u2_range, samples)


# -- standard profiles ---------------------------------------------------------


def _seg(t_lo, t_hi, h, g, dh, dg, d2h, d2g, label, config):
    return ProfileSegment(t_lo, t_hi, h, g, dh, dg, d2h, d2g, label, config)


def sphere_profile(radius=1.0, center_z=0.0, phi_lo=-math.pi / 2, phi_hi=math.pi / 2):
    """Sphere of given radius parametrized by latitude phi; phi = +-pi/2 are poles."""
    R, z0 = float(radius), float(center_z)
    return _seg(
        phi_lo,
        phi_hi,
        h=lambda t: R * np.cos(t),
        g=lambda t: z0 + R * np.sin(t),
        dh=lambda t: -R * np.sin(t),
        dg=lambda t: R * np.cos(t),
        d2h=lambda t: -R * np.cos(t),
        d2g=lambda t: -R * np.sin(t),
        label="sphere",
        config={"kind": "sphere", "radius": R, "center_z": z0,
                "phi_lo": phi_lo, "phi_hi": phi_hi},
    )


def cap_profile(radius, center_z, phi_lo, phi_hi=math.pi / 2):
    """Spherical cap (same parametrization as sphere_profile, partial range)."""
    seg = sphere_profile(radius, center_z, phi_lo, phi_hi)
    return ProfileSegment(
        seg.t_lo, seg.t_hi, seg.h, seg.g, seg.dh, seg.dg, seg.d2h, seg.d2g,
        label="cap",
        config={**seg.config, "kind": "cap"},
    )


def cylinder_profile(radius, z_lo, z_hi):
    a = float(radius)
    return _seg(
        z_lo,
        z_hi,
        h=lambda t: a * np.ones_like(np.asarray(t, dtype=float)),
        g=lambda t: np.asarray(t, dtype=float) + 0.0,
        dh=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        dg=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        d2h=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        d2g=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        label="cylinder",
        config={"kind": "cylinder", "radius": a, "z_lo": z_lo, "z_hi": z_hi},
    )


def catenoid_profile(waist, t_lo, t_hi, z_offset=0.0):
    """Catenoid h = a cosh(t/a), height t + z_offset; minimal (H = 0)."""
    a, z0 = float(waist), float(z_offset)
    return _seg(
        t_lo,
        t_hi,
        h=lambda t: a * np.cosh(t / a),
        g=lambda t: np.asarray(t, dtype=float) + z0,
        dh=lambda t: np.sinh(t / a),
        dg=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        d2h=lambda t: np.cosh(t / a) / a,
        d2g=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        label="catenoid",
        config={"kind": "catenoid", "waist": a, "t_lo": t_lo, "t_hi": t_hi,
                "z_offset": z0},
    )


def spheroid_profile(b, scale=1.0, t_lo=-math.pi / 2, t_hi=math.pi / 2, z_offset=0.0):
    """Spheroid profile (h, g) = scale * (cos t, b sin t); b > 1 is prolate."""
    b, s, z0 = float(b), float(scale), float(z_offset)
    return _seg(
        t_lo,
        t_hi,
        h=lambda t: s * np.cos(t),
        g=lambda t: z0 + s * b * np.sin(t),
        dh=lambda t: -s * np.sin(t),
        dg=lambda t: s * b * np.cos(t),
        d2h=lambda t: -s * np.cos(t),
        d2g=lambda t: -s * b * np.sin(t),
        label="spheroid",
        config={"kind": "spheroid", "b": b, "scale": s, "t_lo": t_lo,
                "t_hi": t_hi, "z_offset": z0},
    )


def paraboloid_profile(t_hi, coeff=0.5):
    """Graph-of-r^2 profile (h, g) = (t, coeff t^2) used for cross-checks."""
    c = float(coeff)
    return _seg(
        0.0,
        t_hi,
        h=lambda t: np.asarray(t, dtype=float) + 0.0,
        g=lambda t: c * np.asarray(t, dtype=float) ** 2,
        dh=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        dg=lambda t: 2.0 * c * np.asarray(t, dtype=float),
        d2h=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        d2g=lambda t: 2.0 * c * np.ones_like(np.asarray(t, dtype=float)),
        label="paraboloid",
        config={"kind": "paraboloid", "t_hi": t_hi, "coeff": c},
    )


def dumbbell_profile(half_width=0.8, neck_depth=0.6, neck_sigma=0.3):
    """Open neck band h = 1 - depth*exp(-t^2/(2 sigma^2)): one geodesic waist at t=0."""
    d, s2 = float(neck_depth), float(neck_sigma) ** 2
    w = float(half_width)

    def bump(t):
        return np.exp(-np.asarray(t, dtype=float) ** 2 / (2.0 * s2))

    return _seg(
        -w,
        w,
        h=lambda t: 1.0 - d * bump(t),
        g=lambda t: np.asarray(t, dtype=float) + 0.0,
        dh=lambda t: d * np.asarray(t, dtype=float) / s2 * bump(t),
        dg=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        d2h=lambda t: d / s2 * (1.0 - np.asarray(t, dtype=float) ** 2 / s2) * bump(t),
        d2g=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        label="dumbbell",
        config={"kind": "dumbbell", "half_width": w, "neck_depth": d,
                "neck_sigma": math.sqrt(s2)},
    )


_PROFILE_BUILDERS = {
    "sphere": lambda c: sphere_profile(c.get("radius", 1.0), c.get("center_z", 0.0),
                                       c.get("phi_lo", -math.pi / 2),
                                       c.get("phi_hi", math.pi / 2)),
    "cap": lambda c: cap_profile(c["radius"], c.get("center_z", 0.0),
                                 c["phi_lo"], c.get("phi_hi", math.pi / 2)),
    "cylinder": lambda c: cylinder_profile(c["radius"], c["z_lo"], c["z_hi"]),
    "catenoid": lambda c: catenoid_profile(c["waist"], c["t_lo"], c["t_hi"],
                                           c.get("z_offset", 0.0)),
    "spheroid": lambda c: spheroid_profile(c["b"], c.get("scale", 1.0),
                                           c.get("t_lo", -math.pi / 2),
                                           c.get("t_hi", math.pi / 2),
                                           c.get("z_offset", 0.0)),
    "paraboloid": lambda c: paraboloid_profile(c["t_hi"], c.get("coeff", 0.5)),
    "dumbbell": lambda c: dumbbell_profile(c.get("half_width", 0.8),
                                           c.get("neck_depth", 0.6),
                                           c.get("neck_sigma", 0.3)),
}


def profile_from_config(cfg):
    """Rebuild a ProfileCurve from its structured config (see ProfileCurve.config)."""
    segs = []
    for c in cfg["segments"]:
        kind = c.get("kind")
        if kind not in _PROFILE_BUILDERS:
            raise ValueError(f"unknown profile segment kind {kind!r}")
        segs.append(_PROFILE_BUILDERS[kind](c))
    return ProfileCurve(segs)


def unit_sphere():
    return RevolutionSurface(ProfileCurve([sphere_profile()]), name="unit-sphere")


def spheroid_surface(b, scale=1.0):
    return RevolutionSurface(
        ProfileCurve([spheroid_profile(b, scale)]), name=f"spheroid(b={b})"
    )
