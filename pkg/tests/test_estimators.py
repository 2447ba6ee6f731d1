import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from gaplab.errors import GeometryError, UsageError
from gaplab.estimators import PowerLawRegressor, WeightedSpectrum


def test_spectrum_estimator_ball():
    est = WeightedSpectrum(grid_size=256, k=4).fit(np.eye(2))
    assert est.lambda1_ == pytest.approx(1.0, abs=1e-6)
    assert est.alpha_ == pytest.approx(np.sqrt(2) - 1, abs=1e-6)
    assert est.predicted_exponent_ == pytest.approx((np.sqrt(2) - 2) / 2, abs=1e-6)
    assert est.transform().shape == (256, 4)


def test_spectrum_estimator_params_and_clone():
    est = WeightedSpectrum(grid_size=64)
    assert est.get_params() == {"grid_size": 64, "k": 6, "extrapolate": True}
    c = clone(est.set_params(k=3))
    assert c.k == 3 and not hasattr(c, "lambda1_")
    with pytest.raises(NotFittedError):
        c.transform()


def test_spectrum_estimator_validation():
    with pytest.raises(GeometryError):
        WeightedSpectrum(grid_size=64).fit(np.diag([1.0, -1.0]))
    with pytest.raises(UsageError):
        WeightedSpectrum(grid_size=64).fit(np.eye(4))
    with pytest.raises(UsageError):
        WeightedSpectrum(grid_size=64).fit([[1.0, 2.0]])


def test_power_law_regressor():
    x = np.geomspace(1e-4, 1e-1, 8)
    y = 2.0 * x ** -0.4
    reg = PowerLawRegressor().fit(x[:, None], y)
    assert reg.coef_ == pytest.approx(-0.4, abs=1e-12)
    assert np.exp(reg.intercept_) == pytest.approx(2.0, rel=1e-12)
    np.testing.assert_allclose(reg.predict(x), y, rtol=1e-12)
    assert reg.score(x, y) == pytest.approx(1.0)


def test_power_law_regressor_validation():
    with pytest.raises(UsageError):
        PowerLawRegressor().fit([1.0, 2.0], [1.0, -1.0])
    with pytest.raises(UsageError):
        PowerLawRegressor().fit([1.0, 2.0, 3.0], [1.0, 2.0])
    with pytest.raises(NotFittedError):
        PowerLawRegressor().predict([1.0])
