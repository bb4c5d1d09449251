"""Reference values for the frozen statistics tests (scipy / statsmodels)."""
import numpy as np
from scipy.stats import wilcoxon
from statsmodels.stats.multitest import multipletests

cases = {
    "exact_no_ties": ([1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06, 1.30],
                      [0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.06, 3.14, 1.29]),
    "exact_n6": ([5.1, 4.9, 6.2, 5.8, 6.0, 5.5], [4.8, 5.2, 5.9, 5.1, 5.35, 5.4]),
}
for name, (x, y) in cases.items():
    r = wilcoxon(x, y, method="exact")
    print(name, repr(r.statistic), repr(r.pvalue))

rng = np.random.default_rng(3)
x = np.round(rng.normal(0.3, 1.0, 30), 1)
y = np.round(rng.normal(0.0, 1.0, 30), 1)
r = wilcoxon(x, y, method="approx", correction=True, zero_method="wilcox")
print("approx_x", list(map(float, x)))
print("approx_y", list(map(float, y)))
print("approx_nonzero", int(np.count_nonzero(x - y)), "p", repr(r.pvalue))

p = [0.01, 0.04, 0.03, 0.005, 0.2, 0.04]
print("holm", list(multipletests(p, method="holm")[1]))
