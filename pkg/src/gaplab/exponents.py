"""Closed-form exponent algebra for the gradient blow-up rate."""
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NumericalError, UsageError


def alpha_of(lam, n):
    """Positive root of ``alpha^2 + (n-1) alpha - lam``.

    Written in the cancellation-free form ``2 lam / ((n-1) + sqrt(...))`` so
    small ``lam`` keeps full relative accuracy.
    """
    if n < 3:
        raise UsageError(f"n must be >= 3, got {n}")
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise UsageError("lambda must be non-negative")
    out = 2.0 * lam / ((n - 1) + np.sqrt((n - 1) ** 2 + 4.0 * lam))
    return float(out) if out.ndim == 0 else out


def ball_beta(n):
    """Ball-case exponent ``[-(n-1) + sqrt((n-1)^2 + 4(n-2))] / 4``."""
    if n < 3:
        raise UsageError(f"n must be >= 3, got {n}")
    return (-(n - 1) + np.sqrt((n - 1) ** 2 + 4.0 * (n - 2))) / 4.0


def gradient_exponent(alpha):
    return (alpha - 1.0) / 2.0


@dataclass(frozen=True)
class ExponentReport:
    n: int
    lambda1: float
    lambda1_error: float
    alpha: float
    alpha_interval: tuple
    predicted_gradient_exponent: float
    exponent_interval: tuple
    ball_beta: float

    def to_dict(self):
        d = asdict(self)
        d["alpha_interval"] = list(self.alpha_interval)
        d["exponent_interval"] = list(self.exponent_interval)
        return d


def predict_rate(basis):
    """Predicted exponent ``(alpha(lambda_1) - 1) / 2`` with its error bar.

    ``alpha`` is increasing in ``lambda``, so evaluating it at the two ends
    of ``lambda_1 -/+ error`` brackets the exponent.
    """
    n = basis.weight.n
    lam = basis.lambda1
    if not lam > 0:
        raise NumericalError(f"lambda_1 = {lam} is not positive")
    err = basis.lambda1_error
    return report_for(n, lam, err)


def report_for(n, lam, err=0.0):
    alpha = alpha_of(lam, n)
    lo = alpha_of(max(lam - err, 0.0), n)
    hi = alpha_of(lam + err, n)
    return ExponentReport(
        n=n, lambda1=float(lam), lambda1_error=float(err), alpha=alpha,
        alpha_interval=(lo, hi),
        predicted_gradient_exponent=gradient_exponent(alpha),
        exponent_interval=(gradient_exponent(lo), gradient_exponent(hi)),
        ball_beta=float(ball_beta(n)))
