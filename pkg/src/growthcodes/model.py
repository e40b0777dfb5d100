"""Exponential recovery model ``P_d(eta) = 1 - lam * exp(-mu * eta**2)``."""

import hashlib
from dataclasses import dataclass
from math import exp, log, sqrt

import numpy as np

from .errors import InsufficientDataError, UnsupportedModelError

FIT_BAND = (1e-6, 1 - 1e-6)


@dataclass(frozen=True)
class ExponentialModel:
    lam: float
    mu: float
    label: str = "custom"
    rms_residual: float = float("nan")
    source_curve_hash: str = ""

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    def pl(self, eta):
        """Residual loss, clamped to [0, 1] (evaluated in log space)."""
        if eta < 0:
            raise ValueError(f"eta must be >= 0, got {eta}")
        log_pl = log(self.lam) - self.mu * eta * eta
        if log_pl >= 0.0:
            return 1.0
        return exp(log_pl)

    def pd(self, eta):
        return 1.0 - self.pl(eta)


GROWTH = ExponentialModel(0.926854, 1.39361, "growth")
R_SOLITON_AS_PRINTED = ExponentialModel(5e8, -20.0, "r-soliton-as-printed")
# lam * exp(-20 eta^2): P_l stays clamped at 1 up to eta ~ 1, then drops sharply
R_SOLITON_SIGNFIX = ExponentialModel(5e8, 20.0, "r-soliton-signfix")

PRESETS = {m.label: m for m in (GROWTH, R_SOLITON_AS_PRINTED, R_SOLITON_SIGNFIX)}


class IdealCode:
    """Every received symbol recovers a new source symbol."""

    label = "ideal"

    def pl(self, eta):
        return max(0.0, 1.0 - eta)

    def pd(self, eta):
        return 1.0 - self.pl(eta)


def eval_pd(model, eta):
    return model.pd(eta)


def eval_pl(model, eta):
    return model.pl(eta)


def curve_hash(curve):
    text = "\n".join(f"{e:.9g},{p:.9g}" for e, p in zip(curve.eta, curve.p_d))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def fit(curve, label="fitted"):
    """Least-squares fit of ``ln P_l = ln lam - mu eta^2``.

    Points whose residual loss falls outside ``FIT_BAND`` are dropped before
    taking logs.
    """
    eta = np.asarray(curve.eta, dtype=float)
    pl = 1.0 - np.asarray(curve.p_d, dtype=float)
    keep = (pl >= FIT_BAND[0]) & (pl <= FIT_BAND[1])
    if keep.sum() < 3:
        raise InsufficientDataError(f"need at least 3 usable points, have {int(keep.sum())}")
    x = eta[keep] ** 2
    y = np.log(pl[keep])
    A = np.column_stack([np.ones_like(x), -x])
    (log_lam, mu), *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ np.array([log_lam, mu]) - y) ** 2)))
    return ExponentialModel(float(np.exp(log_lam)), float(mu), label, rms, curve_hash(curve))


def required_overhead(model, target_pl):
    """Overhead ``eps`` such that ``model.pl(1 + eps) == target_pl``.

    Returns 0 when the target is already met at ``eta = 1`` (including any
    target at or above ``lam``).
    """
    if not 0 < target_pl < 1:
        raise ValueError(f"target_pl must lie in (0, 1), got {target_pl}")
    if model.mu <= 0:
        raise UnsupportedModelError(f"cannot invert a model with mu={model.mu}")
    if target_pl >= model.lam:
        return 0.0
    return max(0.0, sqrt(log(model.lam / target_pl) / model.mu) - 1.0)


def overhead_met_at_zero(model, target_pl):
    return required_overhead(model, target_pl) == 0.0


def write_model(model, path):
    with open(path, "w") as fh:
        fh.write(f"label = {model.label}\n")
        fh.write(f"lambda = {model.lam!r}\n")
        fh.write(f"mu = {model.mu!r}\n")
        fh.write(f"rms_residual = {model.rms_residual!r}\n")
        fh.write(f"source_curve_hash = {model.source_curve_hash}\n")


def read_model(path):
    from .configio import read_kv

    kv = read_kv(path)
    try:
        lam, mu = float(kv["lambda"]), float(kv["mu"])
    except KeyError as exc:
        raise ValueError(f"{path}: missing key {exc}") from None
    return ExponentialModel(
        lam,
        mu,
        kv.get("label", "custom"),
        float(kv.get("rms_residual", "nan")),
        kv.get("source_curve_hash", ""),
    )
