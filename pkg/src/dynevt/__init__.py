"""EVT Value-at-Risk with a dynamic break-even tail threshold.

The tail of the return distribution is modelled as a GPD beyond a
threshold that is not fixed but forecast from rolling variance and the
intraday-histogram ambiguity of the previous month. The package also
ships the standard benchmark VaR models and the Kupiec / Christoffersen /
Diebold-Mariano backtests used to validate them.

Numeric hot paths run in a compiled extension when available; see
``dynevt._kernels.BACKEND`` for the active backend.
"""

from dynevt._kernels import BACKEND
from dynevt.ambiguity import (AmbiguitySeries, AmbiguityValue, BinScheme,
                              ambiguity_series, build_bins,
                              daily_bin_probabilities, monthly_ambiguity)
from dynevt.backtest import (TestResult, ViolationSeries, christoffersen_test,
                             diebold_mariano, dm_matrix, forecast_errors,
                             kupiec_test, validation_table, violations)
from dynevt.benchmarks import (fit_caviar_asymmetric, fit_egarch, fit_garch,
                               rolling_var, var_historical,
                               var_monte_carlo_gbm, var_plain_evt,
                               var_variance_covariance)
from dynevt.brt import (BrtPoint, BrtSeries, BrtTarget, brt_series,
                        historical_forward_var, realized_brt)
from dynevt.errors import (AlignmentError, BrtSearchError, DataError,
                           DynevtError, FitError)
from dynevt.forecaster import (RegressionFit, VarForecast, fit_brt_regression,
                               predict_brt, run_pipeline, uncertain_evt_var)
from dynevt.gpd import (GpdParams, TailFit, evt_var, fit_gpd_mle, gpd_cdf,
                        gpd_pdf, sample_gpd)
from dynevt.timeseries import (DatedSeries, IntradayPanel, PriceSeries,
                               ReturnSeries, WindowSpec, compute_returns,
                               empirical_quantile, rolling_variance,
                               slice_window)

__version__ = "0.1.0"
