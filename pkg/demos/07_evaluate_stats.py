"""Score predictions and ask whether two models really differ.

RMSE and MAE are the headline numbers; the Kruskal-Wallis rank test
then says whether the per-run RMSE samples of two configurations could
plausibly come from the same distribution. Box statistics summarise the
spread without assuming normality.
"""

import numpy as np

from cellcast import MetricSample, box_stats, kruskal_wallis, mae, rmse
from cellcast.stats import comparison_report

truth = np.array([3.0, 4.0, 5.0, 4.0, 3.0])
preds = np.array([2.8, 4.3, 5.1, 3.7, 3.2])
print(f"rmse = {rmse(preds, truth):.4f}, mae = {mae(preds, truth):.4f}")

# Per-run RMSE samples from two model configurations on the same cluster.
lstm_runs = MetricSample("LSTM-0-1L-8U", (0.071, 0.069, 0.074, 0.070, 0.072))
gru_runs = MetricSample("GRU-0-1L-8U", (0.078, 0.081, 0.076, 0.080, 0.079))

result = kruskal_wallis([lstm_runs, gru_runs])
print(f"\nKruskal-Wallis: H = {result.H:.4f}, df = {result.df}, "
      f"p = {result.p_value:.4f} -> {result.verdict}")

overlapping = MetricSample("GRU-alt", (0.070, 0.073, 0.071, 0.069, 0.075))
result2 = kruskal_wallis([lstm_runs, overlapping])
print(f"against an overlapping sample: p = {result2.p_value:.4f} "
      f"-> {result2.verdict}")

print("\nbox statistics per sample:")
for sample in (lstm_runs, gru_runs, overlapping):
    box = box_stats(sample.values)
    print(f"  {sample.label}: median {box.median:.4f}, "
          f"IQR [{box.q1:.4f}, {box.q3:.4f}], "
          f"whiskers [{box.whisker_low:.4f}, {box.whisker_high:.4f}], "
          f"outliers {box.outliers or 'none'}")

report = comparison_report([lstm_runs, gru_runs])
print("\ncomparison report as the pipeline stores it:")
for key, value in report.items():
    print(f"  {key}: {value}")
