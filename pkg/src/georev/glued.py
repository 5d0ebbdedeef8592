"""Glued families of closed surfaces of revolution containing short geodesics.

Two constructions are provided, both assembled from closed-form pieces that
meet with C^1 regularity (continuous position and tangent direction; second
derivatives may jump):

* ``cylinder`` neck: a capped unit sphere, a catenoid collar, a cylinder of
  radius a whose height follows a configurable rule in a, and a radius-a
  hemisphere cap.  The cylinder's waist parallels are closed geodesics of
  length 2 pi a.
* ``spheroid-band`` neck: a thin band of the spheroid (h, g) = a (cos t,
  b sin t), |t| <= a, closed off by two spherical caps.  With b tuned via
  the closure integral the band carries a closed geodesic with a prescribed
  number of self-intersections.

The tangency parameters of the sphere-catenoid join solve

    a cosh(tau) = cos(phi),     sinh(tau) = tan(phi),

whose exact solution is cos(phi) = sqrt(a); a damped Newton iteration starts
from that value and certifies the residual.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .surfaces import (
    ProfileCurve,
    ProfileSegment,
    RevolutionSurface,
    cap_profile,
    catenoid_profile,
    cylinder_profile,
    sphere_profile,
    spheroid_profile,
)

__all__ = [
    "GluedFamilyConfig",
    "GluedSurface",
    "ConstructionError",
    "build_glued_family",
    "family_from_config",
    "parse_height_rule",
    "cylinder_family_closed_forms",
    "spheroid_band_cap_closed_forms",
    "LITERAL_HEIGHT_NOTE",
]

LITERAL_HEIGHT_NOTE = (
    "literal neck height 2a: the piece closed forms give W -> 7*pi as a -> 0 "
    "(capped sphere 4*pi + catenoid 0 + cylinder pi + hemisphere 2*pi); the "
    "6*pi limit requires a neck whose height/radius ratio vanishes, e.g. the "
    "2a^2 rule. Recorded as a note, not a failure."
)

_RULE_RE = re.compile(r"^\s*([0-9.]*)\s*\*?\s*a\s*(?:[\^]|\*\*)?\s*([0-9.]*)\s*$")


class ConstructionError(RuntimeError):
    """Gluing failed; carries residual diagnostics."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


def parse_height_rule(rule):
    """Parse a cylinder-height rule like '2a', '2a^2', '1.5a^1.5' to (coeff, power)."""
    if isinstance(rule, (tuple, list)) and len(rule) == 2:
        return float(rule[0]), float(rule[1])
    m = _RULE_RE.match(str(rule).replace("a2", "a^2"))
    if not m:
        raise ValueError(f"cannot parse cylinder height rule {rule!r}")
    coeff = float(m.group(1)) if m.group(1) else 1.0
    power = float(m.group(2)) if m.group(2) else 1.0
    return coeff, power


@dataclass(frozen=True)
class GluedFamilyConfig:
    """Parameters of one member of a glued family."""

    a: float
    neck_kind: str = "cylinder"  # or "spheroid-band"
    cylinder_height: object = "2a"  # rule string or (coeff, power)
    bottom: str = "capped-unit-sphere-with-catenoid"  # or "spherical-cap"
    top: str = "hemisphere"  # or "spherical-cap"
    b: float | None = None  # spheroid-band elongation
    band_half_width: float | None = None  # defaults to a

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError("neck scale a must be positive")
        if self.neck_kind not in ("cylinder", "spheroid-band"):
            raise ValueError(f"unknown neck kind {self.neck_kind!r}")
        if self.neck_kind == "spheroid-band" and self.b is None:
            raise ValueError("spheroid-band neck requires the elongation b")

    def height(self):
        coeff, power = parse_height_rule(self.cylinder_height)
        return coeff * self.a**power

    def to_dict(self):
        coeff, power = parse_height_rule(self.cylinder_height)
        return {
            "kind": self.neck_kind,
            "a": self.a,
            "cylinder_height_rule": {"coeff": coeff, "power": power},
            "caps": {"bottom": self.bottom, "top": self.top},
            "b": self.b,
            "band_half_width": self.band_half_width,
        }


def family_from_config(cfg_dict):
    rule = cfg_dict.get("cylinder_height_rule", "2a")
    if isinstance(rule, dict):
        rule = (rule["coeff"], rule["power"])
    caps = cfg_dict.get("caps", {})
    cfg = GluedFamilyConfig(
        a=float(cfg_dict["a"]),
        neck_kind=cfg_dict.get("kind", "cylinder"),
        cylinder_height=rule,
        bottom=caps.get("bottom", "capped-unit-sphere-with-catenoid"),
        top=caps.get("top", "hemisphere"),
        b=cfg_dict.get("b"),
        band_half_width=cfg_dict.get("band_half_width"),
    )
    return build_glued_family(cfg)


class GluedSurface(RevolutionSurface):
    """A closed glued surface; remembers its config, joins, and neck band."""

    def __init__(self, profile, cfg, joins, neck_range, notes=()):
        super().__init__(profile, name=f"glued-{cfg.neck_kind}(a={cfg.a})")
        self.cfg = cfg
        self.joins = dict(joins)
        self.neck_range = tuple(neck_range)
        self.notes = tuple(notes)

    @property
    def neck_u2(self):
        """Profile parameter of the canonical neck geodesic (waist parallel)."""
        lo, hi = self.neck_range
        return 0.5 * (lo + hi)

    def piece_energies(self, spec=None):
        out = []
        for seg in self.profile.segments:
            A, W = self.area_and_willmore((seg.t_lo, seg.t_hi), spec)
            out.append((seg.label, A, W))
        return out

    def config(self):
        return {"family": self.cfg.to_dict(), "joins": self.joins,
                "neck_range": list(self.neck_range)}


def _shift_segment(seg, delta, label=None):
    """Reparametrize a segment by t -> t - delta (same geometry)."""
    return ProfileSegment(
        seg.t_lo + delta,
        seg.t_hi + delta,
        h=lambda t, _s=seg: _s.h(np.asarray(t, dtype=float) - delta),
        g=lambda t, _s=seg: _s.g(np.asarray(t, dtype=float) - delta),
        dh=lambda t, _s=seg: _s.dh(np.asarray(t, dtype=float) - delta),
        dg=lambda t, _s=seg: _s.dg(np.asarray(t, dtype=float) - delta),
        d2h=lambda t, _s=seg: _s.d2h(np.asarray(t, dtype=float) - delta),
        d2g=lambda t, _s=seg: _s.d2g(np.asarray(t, dtype=float) - delta),
        label=label or seg.label,
        config={**seg.config, "param_shift": delta},
    )


def _solve_sphere_catenoid_tangency(a, max_iter=40):
    """Damped Newton for (phi, tau): radius and tangent-slope match at the collar."""
    if not 0.0 < a < 1.0:
        raise ConstructionError(
            f"neck scale a={a} admits no sphere-catenoid tangency (need 0 < a < 1)"
        )
    phi = math.acos(math.sqrt(a))
    tau = math.acosh(1.0 / math.sqrt(a))

    def F(p, t):
        return np.array([a * math.cosh(t) - math.cos(p), math.sinh(t) - math.tan(p)])

    v = F(phi, tau)
    for _ in range(max_iter):
        if np.linalg.norm(v) < 1e-14:
            break
        J = np.array(
            [
                [math.sin(phi), a * math.sinh(tau)],
                [-1.0 / math.cos(phi) ** 2, math.cosh(tau)],
            ]
        )
        step = np.linalg.solve(J, -v)
        lam = 1.0
        for _ in range(20):
            cand = F(phi + lam * step[0], tau + lam * step[1])
            if np.linalg.norm(cand) < np.linalg.norm(v):
                phi += lam * step[0]
                tau += lam * step[1]
                v = cand
                break
            lam *= 0.5
        else:
            break
    if np.linalg.norm(v) > 1e-10:
        raise ConstructionError(
            f"sphere-catenoid tangency solve stalled at residual {np.linalg.norm(v):.3e}",
            residuals=tuple(v),
        )
    return phi, tau, float(np.linalg.norm(v))


def _build_cylinder_family(cfg):
    a = cfg.a
    H = cfg.height()
    segs = []
    joins = {}
    if cfg.bottom == "capped-unit-sphere-with-catenoid":
        phi, tau, res = _solve_sphere_catenoid_tangency(a)
        t_a = a * tau
        z_sph = math.sin(phi)
        joins.update(
            {
                "phi_cut": phi,
                "tau": tau,
                "s_a": 1.0 - z_sph,
                "t_a": t_a,
                "tangency_residual": res,
            }
        )
        segs.append(sphere_profile(1.0, 0.0, -math.pi / 2, phi))
        cat = catenoid_profile(a, -t_a, 0.0, z_offset=z_sph + t_a)
        segs.append(_shift_segment(cat, phi + t_a))
        z1 = z_sph + t_a
        neck_lo = phi + t_a
    elif cfg.bottom == "spherical-cap":
        # radius-a hemisphere below the cylinder
        segs.append(
            ProfileSegment(
                -math.pi / 2,
                0.0,
                h=lambda t: a * np.cos(t),
                g=lambda t: a * np.sin(t),
                dh=lambda t: -a * np.sin(t),
                dg=lambda t: a * np.cos(t),
                d2h=lambda t: -a * np.cos(t),
                d2g=lambda t: -a * np.sin(t),
                label="cap",
                config={"kind": "cap", "radius": a, "center_z": 0.0,
                        "phi_lo": -math.pi / 2, "phi_hi": 0.0},
            )
        )
        z1 = 0.0
        neck_lo = 0.0
    else:
        raise ConstructionError(f"unsupported bottom {cfg.bottom!r} for cylinder neck")

    cyl = cylinder_profile(a, z1, z1 + H)
    segs.append(_shift_segment(cyl, neck_lo - z1))
    neck_hi = neck_lo + H

    if cfg.top in ("hemisphere", "spherical-cap"):
        top = cap_profile(a, z1 + H, 0.0, math.pi / 2)
        top = ProfileSegment(
            top.t_lo, top.t_hi, top.h, top.g, top.dh, top.dg, top.d2h, top.d2g,
            label="hemisphere", config={**top.config},
        )
        segs.append(_shift_segment(top, neck_hi))
    else:
        raise ConstructionError(f"unsupported top {cfg.top!r} for cylinder neck")

    profile = ProfileCurve(segs)
    surf = GluedSurface(
        profile,
        cfg,
        joins,
        (neck_lo, neck_hi),
        notes=(LITERAL_HEIGHT_NOTE,) if parse_height_rule(cfg.cylinder_height) == (2.0, 1.0) else (),
    )
    return surf


def _build_spheroid_band_family(cfg):
    a, b = cfg.a, float(cfg.b)
    w = cfg.band_half_width if cfg.band_half_width is not None else a
    if not 0.0 < w < math.pi / 2:
        raise ConstructionError(f"band half-width {w} out of range")
    # join data at t = +w (bottom mirrored by symmetry; g is odd)
    h_j = a * math.cos(w)
    z_j = a * b * math.sin(w)
    slope = math.tan(w) / b  # -dh/dz at the join
    R = h_j * math.sqrt(1.0 + slope * slope)
    d = h_j * slope
    z0 = z_j - d  # top cap center; bottom cap center at -z0
    phi_join = math.asin(d / R)

    # the global parameter is anchored to the band's natural parameter, so the
    # neck evaluators are the bare spheroid closed forms (bit-identical to an
    # unglued neck); only the caps are reparametrized.
    band = spheroid_profile(b, scale=a, t_lo=-w, t_hi=w)
    band = ProfileSegment(
        band.t_lo, band.t_hi, band.h, band.g, band.dh, band.dg,
        band.d2h, band.d2g, label="spheroid-band", config={**band.config},
    )
    bottom = cap_profile(R, -z0, -math.pi / 2, -phi_join)
    bottom = ProfileSegment(
        bottom.t_lo, bottom.t_hi, bottom.h, bottom.g, bottom.dh, bottom.dg,
        bottom.d2h, bottom.d2g, label="cap-bottom", config={**bottom.config},
    )
    bottom = _shift_segment(bottom, phi_join - w)
    top = cap_profile(R, z0, phi_join, math.pi / 2)
    top = ProfileSegment(
        top.t_lo, top.t_hi, top.h, top.g, top.dh, top.dg,
        top.d2h, top.d2g, label="cap-top", config={**top.config},
    )
    top = _shift_segment(top, w - phi_join)

    profile = ProfileCurve([bottom, band, top])
    joins = {
        "cap_radius": R,
        "cap_center_z": z0,
        "phi_join": phi_join,
        "band_half_width": w,
        "tangency_residual": max(profile.join_residuals()),
    }
    return GluedSurface(profile, cfg, joins, (band.t_lo, band.t_hi))


def build_glued_family(cfg: GluedFamilyConfig) -> GluedSurface:
    """Assemble the configured family member; raises ConstructionError on failure."""
    if cfg.neck_kind == "cylinder":
        surf = _build_cylinder_family(cfg)
    else:
        surf = _build_spheroid_band_family(cfg)
    res = surf.profile.join_residuals()
    if res and max(res) > 1e-10:
        raise ConstructionError(
            f"glued profile joins exceed tolerance: {max(res):.3e}", residuals=res
        )
    if not surf.is_closed:
        raise ConstructionError("glued surface does not cap off at both poles")
    return surf


# -- closed-form oracles --------------------------------------------------------


def cylinder_family_closed_forms(cfg: GluedFamilyConfig):
    """Exact per-piece (area, willmore) for the cylinder family.

    Capped unit sphere up to height z: A = W = 2 pi (1 + z); catenoid W = 0
    with A = pi a^2 (tau + sinh tau cosh tau); cylinder A = 2 pi a H,
    W = pi H / (2 a); hemisphere A = 2 pi a^2, W = 2 pi.
    """
    a = cfg.a
    H = cfg.height()
    out = {}
    if cfg.bottom == "capped-unit-sphere-with-catenoid":
        tau = math.acosh(1.0 / math.sqrt(a))
        z_cut = math.sqrt(1.0 - a)
        out["sphere"] = (2.0 * math.pi * (1.0 + z_cut), 2.0 * math.pi * (1.0 + z_cut))
        out["catenoid"] = (
            math.pi * a * a * (tau + math.sinh(tau) * math.cosh(tau)),
            0.0,
        )
    else:
        out["cap"] = (2.0 * math.pi * a * a, 2.0 * math.pi)
    out["cylinder"] = (2.0 * math.pi * a * H, math.pi * H / (2.0 * a))
    out["hemisphere"] = (2.0 * math.pi * a * a, 2.0 * math.pi)
    total_A = sum(v[0] for v in out.values())
    total_W = sum(v[1] for v in out.values())
    out["total"] = (total_A, total_W)
    return out


def spheroid_band_cap_closed_forms(cfg: GluedFamilyConfig):
    """Exact (area, willmore) of each spherical cap of the band family."""
    a, b = cfg.a, float(cfg.b)
    w = cfg.band_half_width if cfg.band_half_width is not None else a
    h_j = a * math.cos(w)
    slope = math.tan(w) / b
    R = h_j * math.sqrt(1.0 + slope * slope)
    d = h_j * slope
    A_cap = 2.0 * math.pi * R * (R - d)
    W_cap = 2.0 * math.pi * (1.0 - d / R)
    return {"cap": (A_cap, W_cap), "cap_radius": R}
