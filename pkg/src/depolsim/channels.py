"""Depolarizer scheme builders and their affine Stokes-space channel maps.

Every element sequence induces a quantum channel on the qubit; on the
Poincare sphere that channel acts as an affine map s -> M s + b which
sends the unit sphere to an ellipsoid.  This module builds the standard
crystal-based depolarizer assemblies, extracts their (M, b) maps from
the time-bin engine, and provides the closed-form cross-checks.

Scheme summary (theta is the tuning angle, in degrees):

* ``single_crystal(phi)``: one crystal; projects the Stokes vector onto
  the axis u = (cos 2*phi, sin 2*phi, 0).
* ``lyot``: crystal + twice-as-long crystal at 45 deg; two perpendicular
  projections, so every input ends at the sphere center.
* ``scheme1(theta)``: two equal crystals, perpendicular at theta = 0,
  with the first one effectively rotated by theta via a pair of
  half-wave plates.  Continuously tunable and generally anisotropic.
* ``scheme2(theta)``: two perpendicular equal crystals with a
  quarter-wave plate at theta between them.  The output DOP depends on
  the input only through S1 (see ``analytic_scheme2_dop``).
* ``scheme3(theta)``: scheme 2 with the second crystal doubled, which
  appends one more S1 projection and extends the reachable DOP down to
  zero (a Lyot depolarizer at theta = 45 deg).
* ``isotropic_triple(theta)``: three two-crystal units with delays
  (1,1), (3,3), (9,9) addressing the three Stokes axes; an isotropic
  channel with shrink factor |cos 2*theta| * cos(theta)**4.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .polarization import (
    JONES_H,
    JONES_P,
    JONES_R,
    JONES_V,
    stokes_from_density,
)
from .temporal import SchemeConfig, crystal, half_wave, quarter_wave, run_scheme

SCHEME_NAMES = (
    "scheme1",
    "scheme2",
    "scheme3",
    "lyot",
    "single_crystal",
    "isotropic_triple",
)

ISOTROPIC_POINT_DEG = float(np.degrees(np.arctan(np.sqrt(2.0))))  # 54.7356...


@dataclass(frozen=True)
class StokesChannel:
    """Affine map s -> m @ s + b on Stokes space."""

    m: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float).reshape(3, 3))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(3))

    def apply(self, s) -> np.ndarray:
        return self.m @ np.asarray(s, dtype=float) + self.b

    def to_json(self) -> dict:
        return {"m": self.m.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_json(cls, data) -> "StokesChannel":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(np.array(data["m"], dtype=float), np.array(data["b"], dtype=float))


def identity_channel() -> StokesChannel:
    return StokesChannel(np.eye(3), np.zeros(3))


def s1_projection_channel() -> StokesChannel:
    return StokesChannel(np.diag([1.0, 0.0, 0.0]), np.zeros(3))


def compose(outer: StokesChannel, inner: StokesChannel) -> StokesChannel:
    """Channel applying `inner` first, then `outer`."""
    return StokesChannel(outer.m @ inner.m, outer.m @ inner.b + outer.b)


def scheme1_elements(theta_deg: float):
    """Half-wave-plate sandwich realizing an effective first-crystal rotation.

    Counter-rotating the plates by theta/2 is equivalent (after the trace
    over time bins) to rotating the first crystal by theta; see
    ``scheme1_rotated_crystal`` for the equivalent direct construction.
    """
    return (
        half_wave(theta_deg / 2.0),
        crystal(0.0, 1),
        half_wave(-theta_deg / 2.0),
        crystal(90.0, 1),
    )


def scheme1_rotated_crystal(theta_deg: float) -> SchemeConfig:
    """Rotated-crystal form of scheme 1: [crystal(theta, 1), crystal(90, 1)]."""
    return SchemeConfig((crystal(theta_deg, 1), crystal(90.0, 1)))


def isotropic_triple_elements(theta_deg: float):
    """Three two-crystal units of delays (1,1), (3,3), (9,9) plus one QWP.

    The 1:3:9 delays keep the units on disjoint time-bin classes, so the
    composite channel is the product of the three unit channels.  Unit 2
    sits at 45 deg so it addresses S2, and the quarter-wave plate at
    45 deg swaps S1 and S3 so unit 3 addresses S3.  Units 2 and 3 are
    tuned on their second crystal: that places each unit's residual
    in-plane rotation where it cannot misalign the next unit's axis, and
    the product then shrinks all three Stokes axes by the same factor
    |cos 2*theta| * cos(theta)**4 at every theta.
    """
    unit1 = scheme1_elements(theta_deg)
    unit2 = (crystal(45.0, 3), crystal(135.0 + theta_deg, 3))
    unit3 = (crystal(0.0, 9), crystal(90.0 + theta_deg, 9))
    return unit1 + unit2 + (quarter_wave(45.0),) + unit3


def build_scheme(kind: str, angle_deg: float | None = None, coherence: float = 0.0) -> SchemeConfig:
    """Element list for a named depolarizer scheme.

    `angle_deg` is the tuning angle (crystal axis for ``single_crystal``,
    wave-plate or effective rotation angle for the others); ``lyot``
    takes none.
    """
    if kind not in SCHEME_NAMES:
        raise ValueError(f"unknown scheme {kind!r}; expected one of {SCHEME_NAMES}")
    if kind == "lyot":
        elements = (crystal(0.0, 1), crystal(45.0, 2))
    else:
        if angle_deg is None:
            raise ValueError(f"scheme {kind!r} requires an angle")
        theta = float(angle_deg)
        if not np.isfinite(theta):
            raise ValueError("scheme angle must be finite")
        if kind == "scheme1":
            elements = scheme1_elements(theta)
        elif kind == "scheme2":
            elements = (crystal(0.0, 1), quarter_wave(theta), crystal(90.0, 1))
        elif kind == "scheme3":
            elements = (crystal(0.0, 1), quarter_wave(theta), crystal(90.0, 2))
        elif kind == "single_crystal":
            elements = (crystal(theta, 1),)
        else:
            elements = isotropic_triple_elements(theta)
    return SchemeConfig(elements, coherence=coherence)


def affine_from_outputs(rho_h, rho_v, rho_p, rho_r) -> StokesChannel:
    """Affine Stokes map of a channel from its action on the h, v, p, r inputs.

    The h/v pair fixes the offset b and the S1 column; the p and r
    outputs give the S2 and S3 columns.  Linearity of the channel in rho
    makes four inputs sufficient.
    """
    s_h = stokes_from_density(rho_h)
    s_v = stokes_from_density(rho_v)
    s_p = stokes_from_density(rho_p)
    s_r = stokes_from_density(rho_r)
    b = (s_h + s_v) / 2.0
    m = np.column_stack([s_h - b, s_p - b, s_r - b])
    return StokesChannel(m, b)


def extract_channel(config: SchemeConfig) -> StokesChannel:
    """Affine Stokes map of a scheme, from four probe propagations."""
    return affine_from_outputs(
        run_scheme(config, JONES_H),
        run_scheme(config, JONES_V),
        run_scheme(config, JONES_P),
        run_scheme(config, JONES_R),
    )


def analytic_scheme2_dop(theta_deg: float, s1: float) -> float:
    """Closed-form output DOP of scheme 2 for quarter-wave angle theta.

    D^2 = (19/8 + 3/2 cos 4t + 1/8 cos 8t) / 4
        + (s1^2 / 4) (-7/8 + 1/2 cos 4t + 3/8 cos 8t)

    depends on the input only through S1; all inputs sharing |S1| are
    depolarized identically.
    """
    if abs(s1) > 1.0 + 1e-12:
        raise ValueError("|s1| must not exceed 1")
    t = np.deg2rad(theta_deg)
    c4, c8 = np.cos(4 * t), np.cos(8 * t)
    d2 = 0.25 * (19.0 / 8.0 + 1.5 * c4 + 0.125 * c8)
    d2 += (s1 * s1 / 4.0) * (-7.0 / 8.0 + 0.5 * c4 + 0.375 * c8)
    return float(np.sqrt(max(d2, 0.0)))


def mutually_unbiased_triad(s1_target: float):
    """Three unit Stokes vectors with equal S1, symmetric about the S1 axis.

    The vectors sit on a cone around the S1 axis at azimuths 0, 120 and
    240 degrees in the S2/S3 plane, so their pairwise dot products are
    all (3*s1^2 - 1)/2.  At s1 = +-1/sqrt(3) they are exactly pairwise
    orthogonal, i.e. the corresponding qubit bases are mutually unbiased;
    that is the only |s1| where an equal-S1 orthogonal triad exists,
    because the squared first components of any orthonormal triad sum
    to 1.
    """
    s1 = float(s1_target)
    limit = 1.0 / np.sqrt(3.0)
    if abs(s1) > limit + 1e-12:
        raise ValueError(f"|s1| = {abs(s1)!r} exceeds 1/sqrt(3); no such triad of bases exists")
    r = np.sqrt(max(1.0 - s1 * s1, 0.0))
    triad = []
    for k in range(3):
        az = 2.0 * np.pi * k / 3.0
        triad.append(np.array([s1, r * np.cos(az), r * np.sin(az)]))
    return triad


def isotropy_report(channel: StokesChannel, tol: float = 1e-6) -> tuple[bool, float]:
    """Whether a channel is an isotropic shrink, and its shrink factor.

    Isotropic means b = 0 and M^T M = lambda^2 I within `tol`: the sphere
    maps to a smaller sphere of radius lambda, possibly rotated.
    Returns (is_isotropic, lambda).
    """
    mtm = channel.m.T @ channel.m
    lam2 = float(np.trace(mtm)) / 3.0
    residual = float(np.linalg.norm(mtm - lam2 * np.eye(3))) + float(np.linalg.norm(channel.b))
    return residual < tol, float(np.sqrt(max(lam2, 0.0)))
