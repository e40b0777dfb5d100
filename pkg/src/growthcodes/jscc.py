"""Joint source/channel rate allocation for video over a Growth code.

Rates are in bits/s. The packet size ``l_p`` is given in bytes and converted
to bits wherever it meets a rate, i.e. the loss term uses
``R / (2 a n_s 8 l_p)``.
"""

from dataclasses import dataclass
from importlib import resources
from math import isfinite, log10

from .configio import read_kv
from .errors import NoInteriorMinimumError
from .model import required_overhead

PEAK = 255.0


@dataclass(frozen=True)
class VideoModelParams:
    alpha: float
    beta: float
    a: float
    b: float
    n_s: float
    l_p: int
    label: str = "custom"

    def __post_init__(self):
        for name in ("alpha", "beta", "a", "b", "n_s", "l_p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def loss_scale(self):
        """``2 a N_s L_p`` with ``L_p`` in bits."""
        return 2.0 * self.a * self.n_s * 8.0 * self.l_p


@dataclass(frozen=True)
class ChannelConfig:
    capacity_b: float
    target_pl: float
    actual_loss_pi: float = 0.0

    def __post_init__(self):
        if not self.capacity_b > 0:
            raise ValueError(f"capacity must be positive, got {self.capacity_b}")
        if not 0 < self.target_pl < 1:
            raise ValueError(f"target_pl must lie in (0, 1), got {self.target_pl}")
        if not 0 <= self.actual_loss_pi < 1:
            raise ValueError(f"loss rate must lie in [0, 1), got {self.actual_loss_pi}")


@dataclass(frozen=True)
class AllocationResult:
    r_star: float
    d_star: float
    psnr: float
    epsilon: float
    eta: float
    constrained: bool
    target_pl: float
    capacity_b: float
    met_at_zero: bool = False

    @property
    def channel_eta(self):
        """Reception rate when the sender fills the channel: ``B / r_star``."""
        return self.capacity_b / self.r_star


@dataclass(frozen=True)
class MismatchResult:
    pi: float
    eta: float
    realized_pl: float
    distortion: float
    psnr: float


def load_params(path):
    kv = read_kv(path)
    try:
        return VideoModelParams(
            alpha=float(kv["alpha"]),
            beta=float(kv["beta"]),
            a=float(kv["a"]),
            b=float(kv["b"]),
            n_s=float(kv["n_s"]),
            l_p=int(kv["l_p"]),
            label=kv.get("label", "custom"),
        )
    except KeyError as exc:
        raise ValueError(f"{path}: missing key {exc}") from None


def default_params():
    """The shipped ``foreman-cif-default`` calibration, not measured data."""
    with resources.as_file(resources.files("growthcodes") / "data" / "foreman_cif_default.cfg") as p:
        return load_params(p)


def psnr(distortion):
    return 10.0 * log10(PEAK * PEAK / distortion)


def source_distortion(params, r):
    if not r > 0:
        raise ValueError(f"rate must be positive, got {r}")
    return params.alpha * r ** (-params.beta)


def loss_distortion(params, r, pl):
    if not r > 0:
        raise ValueError(f"rate must be positive, got {r}")
    if not 0 <= pl <= 1:
        raise ValueError(f"pl must lie in [0, 1], got {pl}")
    return params.b * (1.0 + r / params.loss_scale) * pl


def end_to_end_distortion(params, r, pl):
    return source_distortion(params, r) + loss_distortion(params, r, pl)


def distortion_slope(params, r, pl):
    """``dD/dR``."""
    return params.b * pl / params.loss_scale - params.alpha * params.beta * r ** (-(1.0 + params.beta))


def optimal_rate_unconstrained(params, pl):
    """Stationary point of the convex distortion for fixed ``pl``."""
    if not pl > 0:
        raise NoInteriorMinimumError("distortion decreases monotonically when pl = 0")
    return (params.loss_scale * params.alpha * params.beta / (params.b * pl)) ** (1.0 / (1.0 + params.beta))


def minimum_distortion(params, pl):
    """Closed form at the stationary point: ``alpha (1 + beta) R*^-beta + b pl``."""
    r = optimal_rate_unconstrained(params, pl)
    return params.alpha * (1.0 + params.beta) * r ** (-params.beta) + params.b * pl


def allocate(params, model, channel):
    """Optimal source rate under ``(1 + eps) R <= B`` at the target residual loss."""
    eps = required_overhead(model, channel.target_pl)
    eta = 1.0 + eps
    r_free = optimal_rate_unconstrained(params, channel.target_pl)
    r_cap = channel.capacity_b / eta
    constrained = r_free > r_cap
    r = r_cap if constrained else r_free
    d = end_to_end_distortion(params, r, channel.target_pl)
    return AllocationResult(
        r_star=r,
        d_star=d,
        psnr=psnr(d),
        epsilon=eps,
        eta=eta,
        constrained=constrained,
        target_pl=channel.target_pl,
        capacity_b=channel.capacity_b,
        met_at_zero=eps == 0.0,
    )


def mismatch_eval(params, model, channel, planned, fill_capacity=True):
    """Realized loss and quality when the channel drops ``channel.actual_loss_pi``.

    With ``fill_capacity`` the sender spends the whole capacity on
    redundancy, so the planned reception rate is ``B / r_star`` (equal to
    ``1 + eps`` whenever the bandwidth constraint is active). Otherwise only
    the planned ``1 + eps`` is sent.
    """
    pi = channel.actual_loss_pi
    eta0 = planned.channel_eta if fill_capacity else planned.eta
    eta = eta0 * (1.0 - pi)
    pl = model.pl(eta)
    d = end_to_end_distortion(params, planned.r_star, pl)
    return MismatchResult(pi, eta, pl, d, psnr(d))


def distortion_curve(params, code_model, eta_grid, capacity_b):
    """``(eta, pl, rate, psnr)`` rows for one code.

    The rate is the stationary point for each ``eta``'s residual loss, capped
    at ``capacity_b`` (where the ``pl = 0`` branch also lands).
    """
    rows = []
    prev = None
    for eta in eta_grid:
        if prev is not None and eta <= prev:
            raise ValueError("eta_grid must be strictly increasing")
        prev = eta
        pl = code_model.pl(eta)
        r = capacity_b if pl == 0 else min(optimal_rate_unconstrained(params, pl), capacity_b)
        q = psnr(end_to_end_distortion(params, r, pl))
        if not isfinite(q):
            raise ArithmeticError(f"non-finite PSNR at eta={eta}")
        rows.append((float(eta), pl, r, q))
    return rows
