"""Time-binned forward model of birefringent crystals and wave plates.

A wave packet is tracked as a map from integer time-bin index to an
unnormalized complex (h, v) amplitude pair.  A crystal delays the
component along its slow axis by an integer number of bins; wave plates
rotate every bin in place.  Tracing out the bin index at the end gives
the output polarization density matrix: amplitudes that end up in the
same bin add coherently, amplitudes in different bins add incoherently.

Conventions fixed here:

* Time is quantized to exact integer bins of the shortest walk-off, so
  bin coincidence is exact rather than float-fuzzy.  All crystal delays
  in a scheme must therefore be integer multiples of the shortest one.
* The slow axis of a crystal is the axis named by its `angle_deg`; the
  orthogonal fast axis keeps its bin.
* The common propagation phase per unit delay is omitted: all paths that
  meet in one bin share the same total delay, so it would be a global
  phase per bin (see the carrier-phase invariance test).
* Wave-plate Jones matrices, including their global phases, are
      HWP(t) = [[cos 2t, sin 2t], [sin 2t, -cos 2t]]
      QWP(t) = R(t) diag(1, i) R(-t)
  with R(t) the real rotation matrix.  Only relative phases are
  observable, but fixing the global ones makes results bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .polarization import as_jones

# bins: map from non-negative integer bin index to complex (h, v) amplitude
TimeBinState = dict[int, np.ndarray]

CRYSTAL = "crystal"
HWP = "hwp"
QWP = "qwp"
UNITARY = "unitary"

_WAVE_PLATES = (HWP, QWP)
_KINDS = (CRYSTAL, HWP, QWP, UNITARY)


@dataclass(frozen=True, eq=False)
class OpticalElement:
    """One element of a depolarizer: a crystal, a wave plate, or a unitary."""

    kind: str
    angle_deg: float = 0.0
    delay_bins: int | None = None
    unitary: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        if self.kind == CRYSTAL:
            if self.delay_bins is None or int(self.delay_bins) != self.delay_bins or self.delay_bins < 1:
                raise ValueError("crystal delay must be an integer >= 1")
        elif self.delay_bins is not None:
            raise ValueError(f"{self.kind} elements carry no delay")
        if self.kind == UNITARY:
            u = np.asarray(self.unitary, dtype=complex)
            if u.shape != (2, 2) or np.abs(u @ u.conj().T - np.eye(2)).max() > 1e-12:
                raise ValueError("general element requires a 2x2 unitary matrix")
            object.__setattr__(self, "unitary", u)
        elif self.unitary is not None:
            raise ValueError(f"{self.kind} elements carry no unitary matrix")


def crystal(angle_deg: float, delay_bins: int) -> OpticalElement:
    """Birefringent crystal with slow axis at `angle_deg` from horizontal."""
    return OpticalElement(CRYSTAL, angle_deg=float(angle_deg), delay_bins=int(delay_bins))


def half_wave(angle_deg: float) -> OpticalElement:
    return OpticalElement(HWP, angle_deg=float(angle_deg))


def quarter_wave(angle_deg: float) -> OpticalElement:
    return OpticalElement(QWP, angle_deg=float(angle_deg))


def unitary_element(u) -> OpticalElement:
    return OpticalElement(UNITARY, unitary=np.asarray(u, dtype=complex))


@dataclass(frozen=True)
class SchemeConfig:
    """Ordered element list plus an optional residual-coherence parameter.

    `coherence` is the off-diagonal weight gamma in [0, 1) between
    adjacent time bins; gamma = 0 is the fully walked-off limit where
    bins are perfectly distinguishable.
    """

    elements: tuple[OpticalElement, ...]
    coherence: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise ValueError("scheme needs at least one element")
        if not 0.0 <= self.coherence < 1.0:
            raise ValueError("coherence must lie in [0, 1)")

    def to_json(self) -> dict:
        """JSON form: {"coherence": g, "elements": [{kind, angle_deg, ...}]}."""
        elems = []
        for e in self.elements:
            if e.kind == UNITARY:
                raise ValueError("general unitary elements have no JSON form")
            d = {"kind": e.kind, "angle_deg": e.angle_deg}
            if e.kind == CRYSTAL:
                d["delay_bins"] = e.delay_bins
            elems.append(d)
        return {"coherence": self.coherence, "elements": elems}

    @classmethod
    def from_json(cls, data) -> "SchemeConfig":
        if isinstance(data, str):
            data = json.loads(data)
        elems = []
        for d in data["elements"]:
            kind = d["kind"]
            if kind == CRYSTAL:
                elems.append(crystal(d["angle_deg"], d["delay_bins"]))
            elif kind in _WAVE_PLATES:
                elems.append(OpticalElement(kind, angle_deg=float(d["angle_deg"])))
            else:
                raise ValueError(f"unknown element kind {kind!r}")
        return cls(tuple(elems), coherence=float(data.get("coherence", 0.0)))


def initial_state(j) -> TimeBinState:
    """All amplitude in bin 0, holding the (normalized) input Jones vector."""
    return {0: np.asarray(j, dtype=complex).reshape(2).copy()}


def total_norm(state: TimeBinState) -> float:
    return float(sum(np.vdot(a, a).real for a in state.values()))


def hwp_matrix(angle_deg: float) -> np.ndarray:
    t = np.deg2rad(angle_deg)
    c, s = np.cos(2 * t), np.sin(2 * t)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp_matrix(angle_deg: float) -> np.ndarray:
    t = np.deg2rad(angle_deg)
    c, s = np.cos(t), np.sin(t)
    rot = np.array([[c, -s], [s, c]])
    return rot @ np.diag([1.0, 1.0j]) @ rot.T


def apply_crystal(state: TimeBinState, axis_deg: float, delay: int) -> TimeBinState:
    """Delay the slow-axis component of every bin by `delay` bins.

    The slow axis is e_s = (cos a, sin a) for axis angle a; the fast-axis
    component e_f = (-sin a, cos a) keeps its bin.  Amplitudes landing in
    the same output bin add coherently.
    """
    if int(delay) != delay or delay < 1:
        raise ValueError("crystal delay must be an integer >= 1")
    a = np.deg2rad(axis_deg)
    e_slow = np.array([np.cos(a), np.sin(a)])
    e_fast = np.array([-np.sin(a), np.cos(a)])
    out: TimeBinState = {}
    for t in sorted(state):
        amp = state[t]
        c_slow = complex(e_slow @ amp)
        c_fast = complex(e_fast @ amp)
        if c_fast != 0:
            out[t] = out.get(t, np.zeros(2, dtype=complex)) + c_fast * e_fast
        if c_slow != 0:
            td = t + int(delay)
            out[td] = out.get(td, np.zeros(2, dtype=complex)) + c_slow * e_slow
    return out


def apply_waveplate(state: TimeBinState, kind: str, angle_deg: float) -> TimeBinState:
    """Multiply every bin by the wave plate's Jones matrix."""
    if kind == HWP:
        jmat = hwp_matrix(angle_deg)
    elif kind == QWP:
        jmat = qwp_matrix(angle_deg)
    else:
        raise ValueError(f"unknown wave plate kind {kind!r}")
    return {t: jmat @ a for t, a in state.items()}


def apply_unitary(state: TimeBinState, u) -> TimeBinState:
    u = np.asarray(u, dtype=complex)
    return {t: u @ a for t, a in state.items()}


def apply_element(state: TimeBinState, element: OpticalElement) -> TimeBinState:
    if element.kind == CRYSTAL:
        return apply_crystal(state, element.angle_deg, element.delay_bins)
    if element.kind in _WAVE_PLATES:
        return apply_waveplate(state, element.kind, element.angle_deg)
    return apply_unitary(state, element.unitary)


def collapse(state: TimeBinState) -> np.ndarray:
    """Trace out the bin index: rho = sum_t |a_t><a_t| over bin amplitudes."""
    rho = np.zeros((2, 2), dtype=complex)
    for t in sorted(state):
        a = state[t]
        rho += np.outer(a, a.conj())
    return (rho + rho.conj().T) / 2.0


def collapse_with_coherence(state: TimeBinState, gamma: float) -> np.ndarray:
    """Trace out bins keeping partial cross-bin coherence.

    rho = sum_{t,t'} K(|t - t'|) |a_t><a_t'| with the Gaussian kernel
    K(d) = gamma**(d*d).  Gaussian kernels are positive definite, so the
    result is a valid state for any gamma in [0, 1); gamma = 0 reduces to
    `collapse` exactly and gamma -> 1 restores full coherence.  Physically
    gamma models crystals short enough to leave the two wave packets
    partially overlapping.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    if gamma == 0.0:
        return collapse(state)
    ts = sorted(state)
    rho = np.zeros((2, 2), dtype=complex)
    for t in ts:
        for u in ts:
            k = 1.0 if t == u else gamma ** ((t - u) ** 2)
            rho += k * np.outer(state[t], state[u].conj())
    return (rho + rho.conj().T) / 2.0


def run_scheme(config: SchemeConfig, j) -> np.ndarray:
    """Propagate a pure input through the element list and trace out time."""
    state = initial_state(as_jones(j))
    for element in config.elements:
        state = apply_element(state, element)
    if config.coherence > 0.0:
        return collapse_with_coherence(state, config.coherence)
    return collapse(state)
