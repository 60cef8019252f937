"""Fixed-step simulation of coherence-vector dynamics under pulsed controls.

The integrator is classical RK4 with steps aligned to every pulse edge and
every sample stamp, so the piecewise-constant control never changes inside
a step.  Sampling follows a multirate pattern: a frame of length T is
subdivided by offsets t_0 = 0 < t_1 < ... < t_{l+1} = T and the pattern
repeats for a number of frames.  Outputs y = C x are recorded at every
frame offset t_0 .. t_l of every frame plus the final time, tagged with
frame index and offset index so downstream regression can group them.

Control pulses are rectangular: u(t) = alpha for 0 <= t < tau on one
channel, zero afterwards, with t measured from the start of the
simulation.  A pulse of zero width is the zero input; it is kept in the
metadata so callers can tell a degenerate family from an empty one.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .gksl import CoherenceSystem, EmbeddedSystem

_PHI = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass
class Pulse:
    """Rectangular pulse u(t) = alpha on [0, tau) applied to one channel."""

    tau: float
    alpha: float
    channel: int
    total_time: float = None

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("pulse width tau must be nonnegative")
        if self.total_time is not None and self.total_time < self.tau:
            raise ValueError("total_time must be at least tau")


def make_pulse_family(alpha, taus, channel=0):
    """Family of rectangular pulses sharing one amplitude and channel.

    Widths are sorted and deduplicated.  A zero amplitude is allowed here
    (the family is then the zero input for every width) but it fails the
    identifiability pulse check downstream.
    """
    taus = sorted(set(float(t) for t in taus))
    if not taus:
        raise ValueError("need at least one pulse width")
    if alpha == 0:
        warnings.warn("pulse family with alpha = 0 is degenerate", stacklevel=2)
    return [Pulse(tau=t, alpha=alpha, channel=channel) for t in taus]


@dataclass
class SamplingSchedule:
    """Multirate sampling pattern over repeated frames of length T.

    Attributes
    ----------
    T : float
        Frame length.
    times : ndarray
        Offsets t_0 = 0 < t_1 < ... < t_{l+1} = T within one frame.
    frames : int
        Number of repeated frames.
    declared_irrational : bool
        Set when the increment ratios are irrational by construction or by
        the caller's declaration; the rationality scan is skipped then.
    note : str
        Free-form provenance of the declaration.
    """

    T: float
    times: np.ndarray
    frames: int = 1
    declared_irrational: bool = False
    note: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.T <= 0:
            raise ValueError("frame length T must be positive")
        if self.frames < 1:
            raise ValueError("frames must be at least 1")
        if self.times.ndim != 1 or len(self.times) < 2:
            raise ValueError("times must contain at least the endpoints 0 and T")
        if abs(self.times[0]) > 1e-12 * max(1.0, self.T):
            raise ValueError("first offset must be 0")
        if abs(self.times[-1] - self.T) > 1e-12 * max(1.0, self.T):
            raise ValueError("last offset must equal T")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("offsets must be strictly increasing")

    @property
    def taus(self):
        """Increments tau_i = t_i - t_{i-1}, i = 1 .. l+1."""
        return np.diff(self.times)

    @property
    def l(self):
        return len(self.times) - 2


def golden_schedule(T, l, frames=1):
    """Schedule whose increments are proportional to powers of the golden
    ratio, making every increment ratio irrational by construction."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    w = _PHI ** np.arange(l + 1)
    taus = T * w / w.sum()
    times = np.concatenate([[0.0], np.cumsum(taus)])
    times[-1] = T
    return SamplingSchedule(
        T=T,
        times=times,
        frames=frames,
        declared_irrational=True,
        note="increments proportional to powers of the golden ratio",
    )


@dataclass
class MeasurementRecord:
    """Sampled outputs of one simulation run.

    Arrays are index-aligned.  `pulse_id` holds the index of the pulse
    active at the stamp, or -1 when none is.  `x` carries full state
    snapshots when the run was made with record_states=True (oracle mode
    for regression tests); it is None otherwise.
    """

    t: np.ndarray
    y: np.ndarray
    frame: np.ndarray
    offset_index: np.ndarray
    pulse_id: np.ndarray
    x: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)


def _unpack_system(sys):
    if isinstance(sys, EmbeddedSystem):
        dim = sys.n + 1
        return (sys.A_emb, np.zeros(dim), sys.N_list_emb, sys.C_emb, sys.x0_emb)
    if isinstance(sys, CoherenceSystem):
        return (sys.A, sys.beta, sys.N_list, sys.C, sys.x0)
    raise TypeError("sys must be a CoherenceSystem or EmbeddedSystem")


def simulate(
    sys,
    schedule,
    pulses=(),
    x0=None,
    noise_sigma=0.0,
    seed=None,
    record_states=False,
    steps_per_interval=50,
):
    """Integrate dx/dt = A x + beta + sum_c u_c N_c x and sample y = C x.

    Parameters
    ----------
    sys : CoherenceSystem or EmbeddedSystem
    schedule : SamplingSchedule
    pulses : sequence of Pulse
        Rectangular inputs, all referenced to simulation start.  Pulses on
        the same channel add while simultaneously active.
    x0 : ndarray, optional
        Initial state; defaults to the system's stored x0.
    noise_sigma : float
        Standard deviation of iid Gaussian noise added to every output
        sample.  Zero gives the noiseless record.
    seed : int, optional
        Seed for the noise generator; runs are reproducible given a seed.
    record_states : bool
        Also store exact state snapshots at the stamps (oracle mode).
    steps_per_interval : int
        RK4 resolution: the step never exceeds min(tau_i) divided by this.

    Returns
    -------
    MeasurementRecord
    """
    A, beta, N_list, C, x_default = _unpack_system(sys)
    dim = A.shape[0]
    x = np.array(x_default if x0 is None else x0, dtype=float)
    if x.shape != (dim,):
        raise ValueError(f"x0 must have shape ({dim},)")

    n_channels = len(N_list)
    zero_width = []
    for idx, p in enumerate(pulses):
        if not 0 <= p.channel < n_channels:
            raise ValueError(f"pulse {idx} channel {p.channel} out of range")
        if p.tau == 0:
            zero_width.append(idx)

    T = schedule.T
    times = schedule.times
    M = schedule.frames
    l = schedule.l

    # Sample stamps, one canonical arithmetic so event times match exactly.
    stamps = []  # (time, frame, offset index)
    for k in range(M):
        for i in range(l + 1):
            stamps.append((k * T + times[i], k, i))
    stamps.append(((M - 1) * T + times[l + 1], M - 1, l + 1))
    stamp_times = np.array([s[0] for s in stamps])
    t_end = stamp_times[-1]

    edges = [p.tau for p in pulses if 0.0 < p.tau < t_end]
    events = np.unique(np.concatenate([stamp_times, np.array(edges), [0.0, t_end]]))

    h_max = schedule.taus.min() / steps_per_interval

    def u_vector(t):
        u = np.zeros(n_channels)
        for p in pulses:
            if p.tau > 0 and t < p.tau:
                u[p.channel] += p.alpha
        return u

    def active_pulse(t):
        for idx, p in enumerate(pulses):
            if p.tau > 0 and t < p.tau:
                return idx
        return -1

    rng = np.random.default_rng(seed)
    p_out = C.shape[0]
    rec_t, rec_y, rec_frame, rec_off, rec_pid, rec_x = [], [], [], [], [], []
    ptr = 0

    def record_at(t_now):
        nonlocal ptr
        while ptr < len(stamps) and stamps[ptr][0] == t_now:
            _, k, i = stamps[ptr]
            y = C @ x
            if noise_sigma > 0:
                y = y + noise_sigma * rng.standard_normal(p_out)
            rec_t.append(t_now)
            rec_y.append(y)
            rec_frame.append(k)
            rec_off.append(i)
            rec_pid.append(active_pulse(t_now))
            if record_states:
                rec_x.append(x.copy())
            ptr += 1

    record_at(events[0])
    for a, b in zip(events[:-1], events[1:]):
        u = u_vector(a)
        Mseg = A.copy()
        for c in np.nonzero(u)[0]:
            Mseg = Mseg + u[c] * N_list[c]
        nstep = max(1, math.ceil((b - a) / h_max))
        h = (b - a) / nstep
        for _ in range(nstep):
            k1 = Mseg @ x + beta
            k2 = Mseg @ (x + 0.5 * h * k1) + beta
            k3 = Mseg @ (x + 0.5 * h * k2) + beta
            k4 = Mseg @ (x + h * k3) + beta
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        record_at(b)

    return MeasurementRecord(
        t=np.array(rec_t),
        y=np.array(rec_y),
        frame=np.array(rec_frame, dtype=int),
        offset_index=np.array(rec_off, dtype=int),
        pulse_id=np.array(rec_pid, dtype=int),
        x=np.array(rec_x) if record_states else None,
        meta={
            "noise_sigma": noise_sigma,
            "seed": seed,
            "steps_per_interval": steps_per_interval,
            "zero_width_pulses": zero_width,
        },
    )
