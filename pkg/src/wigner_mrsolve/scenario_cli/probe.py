"""Decay rate of cat-state interference fringes."""

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, InvalidArgumentError

MIN_SNAPSHOTS = 4
# amplitudes below this fraction of the first one are treated as lost in rounding
NOISE_FLOOR = 1e-10


@dataclass(frozen=True)
class FringeProbeResult:
    rate: float
    reference: float
    times: tuple
    amplitudes: tuple
    wavenumber: float

    @property
    def relative_error(self):
        if self.reference == 0:
            return abs(self.rate)
        return abs(self.rate - self.reference) / self.reference

    def as_dict(self):
        return {"rate": self.rate, "reference": self.reference,
                "relative_error": self.relative_error, "wavenumber": self.wavenumber,
                "times": list(self.times), "amplitudes": list(self.amplitudes)}


def fringe_amplitude(W, wavenumber):
    """``|sum_p W(0, p) exp(-i k p)| dp`` on the q node nearest the origin."""
    g = W.grid
    i = int(np.argmin(np.abs(g.q)))
    if abs(g.q[i]) > g.dq:
        raise InvalidArgumentError("q = 0 lies outside the grid")
    row = W.values[i]
    return float(abs(np.sum(row * np.exp(-1j * wavenumber * g.p))) * g.dp)


def fringe_decay_probe(trajectory, q0, params):
    """Least-squares decay rate of the ``cos(2 q0 p / hbar)`` fringe at q = 0.

    ``trajectory`` is a ``Trajectory`` or a sequence of fields. The reference
    rate for pure momentum diffusion is ``4 D q0^2 / hbar^2``.
    """
    snaps = getattr(trajectory, "snapshots", trajectory)
    snaps = sorted(snaps, key=lambda w: w.time)
    k = 2.0 * q0 / params.hbar
    times, amps = [], []
    for W in snaps:
        a = fringe_amplitude(W, k)
        if amps and a <= NOISE_FLOOR * amps[0]:
            continue
        if a > 0 and np.isfinite(a):
            times.append(float(W.time))
            amps.append(a)
    distinct = len(set(times))
    if len(times) < MIN_SNAPSHOTS or distinct < 2:
        raise InsufficientDataError(
            f"fringe probe needs at least {MIN_SNAPSHOTS} usable snapshots, got {len(times)}")
    slope = np.polyfit(np.array(times), np.log(np.array(amps)), 1)[0]
    reference = 4.0 * params.diffusion * q0 ** 2 / params.hbar ** 2
    return FringeProbeResult(float(-slope), reference, tuple(times), tuple(amps), k)
