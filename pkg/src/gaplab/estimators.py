"""Thin scikit-learn style wrappers around the spectral and fitting routines.

They add ``get_params``/``set_params`` (so parameter grids and cloning
work) but carry no learning: ``fit`` just runs the deterministic solver.
"""
import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .errors import UsageError
from .exponents import predict_rate
from .geometry import build_weight, check_spd
from .harness import fit_exponent
from .spectral import solve_spectrum
from .validation import check_matrix, check_positive_array


class WeightedSpectrum(BaseEstimator):
    """Spectrum of the sphere weight ``a(xi) = xi^T M xi``.

    Parameters
    ----------
    grid_size : int or (int, int)
        Sphere grid; an int for ``n = 3`` (circle), a pair for ``n = 4``.
    k : int
        Number of eigenpairs.
    extrapolate : bool
        Richardson-extrapolate from a twice finer grid.
    """

    def __init__(self, grid_size=1024, k=6, extrapolate=True):
        self.grid_size = grid_size
        self.k = k
        self.extrapolate = extrapolate

    def fit(self, M, y=None):
        M = check_matrix(M, name="M")
        if M.shape[0] not in (2, 3):
            raise UsageError("M must be 2x2 (n = 3) or 3x3 (n = 4)")
        check_spd(M)
        self.basis_ = solve_spectrum(build_weight(M, self.grid_size), k=self.k,
                                     extrapolate=self.extrapolate)
        rep = predict_rate(self.basis_)
        self.eigenvalues_ = self.basis_.eigenvalues
        self.lambda1_ = rep.lambda1
        self.lambda1_error_ = rep.lambda1_error
        self.alpha_ = rep.alpha
        self.predicted_exponent_ = rep.predicted_gradient_exponent
        self.report_ = rep
        return self

    def transform(self, M=None):
        """Eigenfunction samples, one column per eigenpair."""
        check_is_fitted(self, "basis_")
        return self.basis_.eigenfunctions


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Fit ``y = C x^p`` by least squares in log-log coordinates."""

    def fit(self, X, y):
        x = check_positive_array(np.ravel(X), "x", min_size=2)
        y = check_positive_array(y, "y", min_size=2)
        if x.size != y.size:
            raise UsageError("x and y lengths differ")
        fit = fit_exponent(np.column_stack([x, y]))
        self.coef_ = fit.slope
        self.intercept_ = fit.intercept
        self.r2_ = fit.r2
        self.stderr_ = fit.stderr
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        x = check_positive_array(np.ravel(X), "x")
        return np.exp(self.intercept_) * x ** self.coef_
