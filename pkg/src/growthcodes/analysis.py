"""Density evolution of the peeling decoder via the Wormald ODE system.

State convention (all quantities per source symbol):

* ``v[i]`` -- fraction of variable nodes with ``i`` remaining edges. ``v[0]``
  counts degree-0 nodes, i.e. recovered symbols *plus* the ``isolated``
  Poisson mass of symbols no received packet touched.
* ``c[i]`` -- check nodes of residual degree ``i`` per source symbol
  (``c[0]`` is unused and kept at 0 so that indices read as degrees).

Time ``tau`` counts decoding steps per source symbol; one step consumes one
degree-1 check node and recovers exactly one variable node, so the
recovery fraction ``v[0] - isolated`` equals ``tau`` until the ripple dries
up.
"""

import csv
from dataclasses import dataclass, field
from math import ceil, isfinite

import numpy as np
from scipy.stats import poisson

from .errors import NumericalInstabilityError

DEFAULT_STEP = 1e-3
HALT_TOLERANCE = 1e-7
NEGATIVE_SLACK = 1e-9
POISSON_TAIL = 1e-12
MIN_STEP_FRACTION = 2.0**-20


@dataclass
class TannerState:
    tau: float
    v: np.ndarray
    c: np.ndarray
    isolated: float = 0.0

    @property
    def d_v_max(self):
        return len(self.v) - 1

    @property
    def d_c_max(self):
        return len(self.c) - 1

    @property
    def v0(self):
        return float(self.v[0])

    @property
    def recovered(self):
        """Decoded fraction, excluding never-referenced symbols."""
        return max(0.0, float(self.v[0]) - self.isolated)

    @property
    def edges(self):
        return float(np.dot(np.arange(len(self.v)), self.v))

    @property
    def check_edges(self):
        return float(np.dot(np.arange(len(self.c)), self.c))


@dataclass
class OdeTrajectory:
    tau: np.ndarray
    v: np.ndarray  # shape (samples, d_v_max + 1)
    c: np.ndarray  # shape (samples, d_c_max + 1)
    isolated: float
    halt_reason: str
    clamped: int = 0

    def __len__(self):
        return len(self.tau)

    def state(self, i):
        return TannerState(float(self.tau[i]), self.v[i].copy(), self.c[i].copy(), self.isolated)

    @property
    def final(self):
        return self.state(-1)

    @property
    def v0(self):
        return self.v[:, 0]

    @property
    def p_d(self):
        return self.final.recovered


@dataclass
class RecoveryCurve:
    eta: np.ndarray
    p_d: np.ndarray
    source: str = "ode"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.p_d = np.asarray(self.p_d, dtype=float)
        if self.eta.shape != self.p_d.shape or self.eta.ndim != 1:
            raise ValueError("eta and p_d must be 1-d and of equal length")
        if np.any(np.diff(self.eta) <= 0):
            raise ValueError("eta must be strictly increasing")
        if np.any(self.eta < 0) or np.any((self.p_d < 0) | (self.p_d > 1)):
            raise ValueError("eta must be >= 0 and p_d in [0, 1]")

    def __len__(self):
        return len(self.eta)

    @property
    def points(self):
        return list(zip(self.eta.tolist(), self.p_d.tolist()))


def initial_state(code, eta):
    """Poisson variable side and ``eta * Omega`` check side at ``tau = 0``.

    ``code`` is a ``DegreeDistribution`` or a ``GrowthSchedule``; for the
    latter the degree mix of the first ``eta * k`` transmitted symbols is used.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    omega = code.distribution_at(eta * code.k).as_array()
    m = eta * float(np.dot(np.arange(1, len(omega) + 1), omega))
    d_v = int(poisson.isf(POISSON_TAIL, m)) + 1
    while poisson.sf(d_v, m) >= POISSON_TAIL:
        d_v += 1
    v = poisson.pmf(np.arange(d_v + 1), m)
    c = np.concatenate([[0.0], eta * omega])
    return TannerState(0.0, v, c, isolated=float(v[0]))


def _rhs(y, nv):
    # RK stages may overshoot slightly below zero near the end of decoding
    y = np.maximum(y, 0.0)
    v = y[:nv]
    c = y[nv:]
    deg_v = np.arange(nv)
    deg_c = np.arange(len(c))
    edges = max(float(np.dot(deg_v, v)), 1e-12)
    # expected number of further edges freed by recovering one variable node
    excess = float(np.dot(deg_v * (deg_v - 1), v)) / edges
    dv = -deg_v * v / edges
    dv[0] = -dv[1:].sum()
    hit = excess / edges
    up = np.zeros_like(c)
    up[:-1] = deg_c[1:] * c[1:]
    dc = hit * (up - deg_c * c)
    dc[0] = 0.0
    dc[1] -= 1.0
    return np.concatenate([dv, dc])


def _rk4(y, h, nv):
    k1 = _rhs(y, nv)
    k2 = _rhs(y + 0.5 * h * k1, nv)
    k3 = _rhs(y + 0.5 * h * k2, nv)
    k4 = _rhs(y + h * k3, nv)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(state, step=DEFAULT_STEP, max_steps=None, halt_tolerance=HALT_TOLERANCE):
    """Advance the peeling ODE with classical fixed-step RK4 until it halts.

    Halts when the ripple empties (``c[1]`` reaches ``halt_tolerance``), when
    no edges remain, or after ``max_steps``. The halting instant is located
    by linear interpolation inside the last step.
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if max_steps is None:
        max_steps = ceil(1.5 / step)
    nv = len(state.v)
    y = np.concatenate([state.v, state.c]).astype(float)
    bound = 10.0 * max(1.0, float(np.abs(y).max()))
    taus = [state.tau]
    ys = [y.copy()]
    deg_v = np.arange(nv)
    clamped = 0

    def edges(z):
        return float(np.dot(deg_v, z[:nv]))

    def crossing(z):
        return z[nv + 1] <= halt_tolerance or edges(z) <= halt_tolerance

    reason = None
    if y[nv + 1] <= halt_tolerance:
        reason = "ripple-exhausted"
    elif edges(y) <= halt_tolerance:
        reason = "all-edges-removed"

    tau = state.tau
    n = 0
    while reason is None:
        if n >= max_steps:
            reason = "max-steps"
            break
        y_new = _rk4(y, step, nv)
        n += 1
        if not np.all(np.isfinite(y_new)) or np.abs(y_new).max() > bound:
            raise NumericalInstabilityError(f"ODE state diverged at tau={tau + step:.6g}", tau=tau + step)
        h = step
        if crossing(y_new):
            # bisect the halting step; RK stages overshooting zero would
            # otherwise bias the crossing time by O(step)
            while h > step * MIN_STEP_FRACTION:
                h *= 0.5
                y_try = _rk4(y, h, nv)
                while not crossing(y_try):
                    y, tau = y_try, tau + h
                    taus.append(tau)
                    ys.append(y.copy())
                    y_try = _rk4(y, h, nv)
                y_new = y_try
            e_old, e_new = edges(y), edges(y_new)
            c_old, c_new = y[nv + 1], y_new[nv + 1]
            theta_c = (c_old - halt_tolerance) / (c_old - c_new) if c_new <= halt_tolerance else 2.0
            theta_e = (e_old - halt_tolerance) / (e_old - e_new) if e_new <= halt_tolerance else 2.0
            theta = min(theta_c, theta_e, 1.0)
            reason = "ripple-exhausted" if theta_c <= theta_e else "all-edges-removed"
            y_new = y + theta * (y_new - y)
            h *= theta
        tau += h
        clamped += int((y_new < -NEGATIVE_SLACK).sum())
        y = np.where(y_new < 0, 0.0, y_new)
        taus.append(tau)
        ys.append(y.copy())

    arr = np.array(ys)
    return OdeTrajectory(
        tau=np.array(taus),
        v=arr[:, :nv],
        c=arr[:, nv:],
        isolated=state.isolated,
        halt_reason=reason,
        clamped=clamped,
    )


def recovery_probability(code, eta, step=DEFAULT_STEP):
    """Final recovery fraction predicted by the ODE (0 for ``eta == 0``)."""
    if eta == 0:
        return 0.0
    return integrate(initial_state(code, eta), step=step).p_d


def recovery_curve(code, eta_grid, step=DEFAULT_STEP):
    etas = np.asarray(eta_grid, dtype=float)
    if etas.size == 0:
        raise ValueError("eta_grid is empty")
    if np.any(np.diff(etas) <= 0) or np.any(etas < 0):
        raise ValueError("eta_grid must be increasing and non-negative")
    p = []
    for eta in etas:
        try:
            p.append(recovery_probability(code, float(eta), step=step))
        except NumericalInstabilityError as exc:
            exc.eta = float(eta)
            raise
    return RecoveryCurve(etas, np.clip(p, 0.0, 1.0), source="ode", meta={"step": step})


def _fmt(x):
    return f"{x:.9g}" if isfinite(x) else str(x)


def write_trajectory_csv(traj, path, comment=None):
    n_c = traj.c.shape[1] - 1
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "v_0"] + [f"c_{i}" for i in range(1, n_c + 1)])
        for t, v, c in zip(traj.tau, traj.v, traj.c):
            w.writerow([_fmt(t), _fmt(v[0])] + [_fmt(x) for x in c[1:]])


def write_curve_csv(curve, path, comment=None):
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eta", "p_d", "source"])
        for e, p in zip(curve.eta, curve.p_d):
            w.writerow([_fmt(e), _fmt(p), curve.source])


def read_curve_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    header, body = rows[0], rows[1:]
    if header[:2] != ["eta", "p_d"]:
        raise ValueError(f"{path}: expected columns eta,p_d")
    source = body[0][2] if body and len(body[0]) > 2 else "ode"
    return RecoveryCurve([float(r[0]) for r in body], [float(r[1]) for r in body], source=source)
