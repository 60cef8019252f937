"""Multirate discrete models and continuous-time reconstruction.

A frame of length T is subdivided by offsets t_0 = 0 < ... < t_{l+1} = T.
Sampling x(kT + t_i) of dx/dt = A x + B u gives one discrete-time model
per offset, all sharing the frame map G = exp(A T):

    G_i     = exp(A t_i)
    F_tau_i = (integral_0^{tau_i} exp(A s) ds) B
    F_i     = exp(A (T - t_i)) F_tau_i
    Gamma   = [C; C G_1; ...; C G_l]            (stacked readout block)

From the family of per-offset models one extracts single-rate transition
matrices G_tau_i = exp(A tau_i) by least squares between stacked
observability blocks, and from those the continuous pair (A, B):
eigenvalues of A are found as the intersection of the matrix-logarithm
branch sets of the G_tau_i over all rates, which is a single point per
eigenvalue exactly when the increment ratios avoid resonant (rational)
alignment; the input matrix follows from F_tau by inverting the
exponential integral (computed by the augmented-block trick:
expm([[A, I], [0, 0]] tau) carries the integral in its upper-right
block).

Branch search is windowed: only candidates with |Im mu| <= pi / min(tau)
are considered, the resolution limit of the fastest rate.  Zero
survivors or more than one survivor raise, naming the cause; silent
aliasing is reserved for the genuinely unresolvable single-rate case.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

_TWO_PI = 2.0 * math.pi


@dataclass
class DiscreteMultirateModel:
    """Discrete-time models of one multirate sampling pattern.

    G_offsets[i] holds exp(A t_i) (fitted or exact) for i = 0 .. l+1, so
    G_offsets[0] is the identity and G_offsets[-1] equals G.  F holds the
    frame-tail input maps F_1 .. F_{l+1} when inputs were modeled, else
    None.
    """

    order: int
    T: float
    times: np.ndarray
    G: np.ndarray
    G_offsets: list
    Gamma: np.ndarray
    C: np.ndarray
    F: list = None


@dataclass
class SingleRateFamily:
    """Per-increment transition matrices G_tau_i = exp(A tau_i)."""

    order: int
    taus: np.ndarray
    G_taus: list
    C: np.ndarray
    F_taus: list = None


@dataclass
class ContinuousModel:
    A: np.ndarray
    B: np.ndarray = None
    eigenvalues: np.ndarray = None
    window: float = None
    residuals: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def van_loan_integral(A, tau):
    """integral_0^tau exp(A s) ds via the augmented block exponential."""
    n = A.shape[0]
    blk = np.zeros((2 * n, 2 * n))
    blk[:n, :n] = A
    blk[:n, n:] = np.eye(n)
    return expm(blk * tau)[:n, n:]


def exact_multirate_model(A, B, C, schedule):
    """Analytic multirate model of dx/dt = A x + B u sampled on `schedule`.

    This is the oracle-mode constructor used when the continuous system
    is known; fitting from records goes through fit_multirate.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    times = schedule.times
    T = schedule.T
    l = schedule.l

    G_offsets = [expm(A * t) for t in times]
    G = G_offsets[-1]
    F = []
    for i in range(1, l + 2):
        F_tau = van_loan_integral(A, times[i] - times[i - 1]) @ B
        F.append(expm(A * (T - times[i])) @ F_tau)
    Gamma = np.vstack([C @ G_offsets[i] for i in range(l + 1)])
    return DiscreteMultirateModel(
        order=n, T=T, times=times.copy(), G=G, G_offsets=G_offsets, Gamma=Gamma, C=C, F=F
    )


def _states_from_record(record, order, C):
    if record.x is not None:
        X = np.asarray(record.x, dtype=float)
        if X.shape[1] != order:
            raise ValueError(
                f"recorded states have dimension {X.shape[1]}, expected order {order}"
            )
        return X, np.eye(order) if C is None else np.atleast_2d(C)
    if C is None:
        raise ValueError("outputs-only fitting requires the output matrix C")
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if np.linalg.matrix_rank(C) < order:
        raise ValueError(
            "output matrix does not have full column rank; states are not "
            "recoverable sample-by-sample"
        )
    X, *_ = np.linalg.lstsq(C, record.y.T, rcond=None)
    return X.T, C


def fit_multirate(record, schedule, order, C=None):
    """Least-squares fit of per-offset transition matrices from a record.

    Regresses x(kT + t_i) = G_i x(kT) over frames k, offset by offset,
    and x((k+1)T) = G x(kT) for the frame map.  States are taken from
    snapshots when the record carries them, otherwise recovered per
    sample from y = C x, which needs C of full column rank.

    The record must cover every offset of every frame (the layout the
    simulator produces).  Input maps F are not fit here; autonomous
    records carry no input information, so F stays None.
    """
    times = schedule.times
    M = schedule.frames
    l = schedule.l
    X, C_used = _states_from_record(record, order, C)

    by_key = {}
    for s in range(len(record.t)):
        by_key[(int(record.frame[s]), int(record.offset_index[s]))] = X[s]

    def column_block(offset):
        cols = []
        for k in range(M):
            key = (k, offset)
            if key not in by_key:
                raise ValueError(f"record is missing frame {k}, offset {offset}")
            cols.append(by_key[key])
        return np.array(cols).T  # (order, M)

    X0 = column_block(0)
    rank0 = np.linalg.matrix_rank(X0)
    if rank0 < order:
        raise ValueError(
            f"rank-deficient regression: frame-start states span {rank0} of "
            f"{order} directions; more frames or a richer initial state needed"
        )

    def regress(target):
        # solve K X0 = target for K
        K, *_ = np.linalg.lstsq(X0.T, target.T, rcond=None)
        return K.T

    G_offsets = [np.eye(order)]
    for i in range(1, l + 1):
        G_offsets.append(regress(column_block(i)))

    nxt = []
    for k in range(M):
        key = (k + 1, 0) if k + 1 < M else (M - 1, l + 1)
        if key not in by_key:
            raise ValueError(f"record is missing the frame-end state for frame {k}")
        nxt.append(by_key[key])
    G = regress(np.array(nxt).T)
    G_offsets.append(G)

    Gamma = np.vstack([C_used @ G_offsets[i] for i in range(l + 1)])
    return DiscreteMultirateModel(
        order=order,
        T=schedule.T,
        times=times.copy(),
        G=G,
        G_offsets=G_offsets,
        Gamma=Gamma,
        C=C_used,
        F=None,
    )


def single_rate_models(model):
    """Extract G_tau_i = exp(A tau_i) from a multirate model.

    Stacks per-offset observability blocks Gamma_i = [C G^p G_i, p = 0..n]
    and solves Gamma_{i-1} G_tau_i = Gamma_i in least squares.  Each
    Gamma_{i-1} must have full column rank; otherwise the offset is named
    in the error.
    """
    n = model.order
    C = model.C
    times = model.times
    powers = [C.copy()]
    for _ in range(n):
        powers.append(powers[-1] @ model.G)

    def gamma_stack(i):
        return np.vstack([P @ model.G_offsets[i] for P in powers])

    G_taus = []
    prev = gamma_stack(0)
    for i in range(1, len(times)):
        cur = gamma_stack(i)
        if np.linalg.matrix_rank(prev) < n:
            raise ValueError(
                f"stacked observability block at offset {i - 1} is rank deficient; "
                "single-rate extraction not possible"
            )
        Gt, *_ = np.linalg.lstsq(prev, cur, rcond=None)
        G_taus.append(Gt)
        prev = cur

    F_taus = None
    if model.F is not None:
        F_taus = []
        last = len(times) - 1
        for i in range(1, last):
            F_taus.append(np.linalg.solve(model.G, model.G_offsets[i] @ model.F[i - 1]))
        F_taus.append(model.F[last - 1])
    taus = np.diff(times)
    return SingleRateFamily(order=n, taus=taus, G_taus=G_taus, C=C, F_taus=F_taus)


def reconstruct_continuous(family, match_tol=1e-6, cond_cap=1e12):
    """Continuous (A, B) from single-rate transition matrices.

    Every G_tau_i equals exp(A tau_i), so each continuous eigenvalue must
    appear in the log-branch set of every rate.  Candidates are generated
    from the first rate inside the window |Im mu| <= pi / min(tau) and
    kept only if every other rate has a branch within `match_tol`.
    Exactly one survivor per eigenvalue is required.

    Eigenvectors are taken from the first rate (all G_tau_i share them),
    requiring diagonalizability; a defective transition matrix raises.

    B is recovered from F_tau of the first rate by inverting the
    exponential integral, when input maps are present; otherwise B is
    None.

    Returns a ContinuousModel with per-rate relative residuals
    ||expm(A tau_i) - G_tau_i|| / ||G_tau_i|| for self-diagnosis.
    """
    taus = np.asarray(family.taus, dtype=float)
    G_list = family.G_taus
    n = family.order
    window = math.pi / taus.min()
    slack = 10 * match_tol

    lam0, V = np.linalg.eig(G_list[0])
    if np.min(np.abs(lam0)) < 1e-300:
        raise ValueError("transition matrix is singular; no matrix logarithm")
    if np.linalg.cond(V) > cond_cap:
        raise ValueError(
            "transition matrix is not reliably diagonalizable; defective "
            "(shared Jordan block) reconstruction is not supported"
        )

    def branch_set(lams, tau):
        K = math.ceil(window * tau / _TWO_PI) + 2
        ks = np.arange(-K, K + 1)
        mus = (np.log(lams)[:, None] + 1j * _TWO_PI * ks[None, :]) / tau
        mus = mus.reshape(-1)
        return mus[np.abs(mus.imag) <= window + slack]

    others = [branch_set(np.linalg.eigvals(G), tau) for G, tau in zip(G_list[1:], taus[1:])]

    mu = np.empty(n, dtype=complex)
    for m in range(n):
        cands = branch_set(np.array([lam0[m]]), taus[0])
        survivors = [
            c for c in cands if all(np.min(np.abs(c - o)) <= match_tol for o in others)
        ]
        if len(survivors) == 0:
            raise ValueError(
                f"no continuous eigenvalue consistent across rates for mode {m}; "
                "the fitted single-rate models disagree"
            )
        if len(survivors) > 1:
            raise ValueError(
                f"branch ambiguity unresolved for mode {m}: {len(survivors)} "
                "candidates survive; the sampling schedule cannot separate aliases"
            )
        mu[m] = survivors[0]

    A = V @ np.diag(mu) @ np.linalg.inv(V)
    imag_res = np.max(np.abs(A.imag))
    if imag_res > 1e-6 * (1.0 + np.max(np.abs(A.real))):
        raise ValueError(
            f"reconstructed A has imaginary residue {imag_res:.3e}; "
            "input models are inconsistent"
        )
    A = A.real

    residuals = []
    for G, tau in zip(G_list, taus):
        residuals.append(
            float(np.linalg.norm(expm(A * tau) - G) / max(np.linalg.norm(G), 1e-300))
        )

    B = None
    notes = []
    if family.F_taus is not None:
        J = van_loan_integral(A, taus[0])
        B, *_ = np.linalg.lstsq(J, family.F_taus[0], rcond=None)
    else:
        notes.append("no input maps in the family; B not recovered")

    return ContinuousModel(
        A=A, B=B, eigenvalues=mu, window=window, residuals=residuals, notes=notes
    )
