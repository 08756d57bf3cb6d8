"""One-off: pooled results for the ref-3 fixture from statsmodels' meta-analysis code.

Per-study Cohen's d is recovered from statsmodels' bias-corrected SMD
(effectsize_smd) by dividing out its small-sample factor; pooling uses
combine_effects with the DerSimonian-Laird (chi2) tau2 estimator.  The output
is committed as tests/data/external_reference.json and is not regenerated by
the test suite.
"""

import json
from pathlib import Path

import numpy as np
import statsmodels
from statsmodels.stats.meta_analysis import combine_effects, effectsize_smd

ROOT = Path(__file__).resolve().parents[1]
rows = np.genfromtxt(ROOT / "src/wikimeta/fixtures/data/ref-3.csv", delimiter=",",
                     names=True, dtype=None, encoding="utf-8")
n1, m1, s1 = rows["patients_n"], rows["patients_mean"], rows["patients_sd"]
n2, m2, s2 = rows["controls_n"], rows["controls_mean"], rows["controls_sd"]

g, _ = effectsize_smd(m1, s1, n1, m2, s2, n2)
j = 1 - 3 / (4 * (n1 + n2) - 9)
d = g / j
var_d = (n1 + n2) / (n1 * n2) + d ** 2 / (2 * (n1 + n2))
res = combine_effects(d, var_d, method_re="chi2", use_t=False)
ci = res.conf_int(use_t=False)

out = {
    "fixture": "ref-3",
    "measure": "smd_cohen",
    "provenance": (f"statsmodels {statsmodels.__version__}: effectsize_smd -> Cohen's d, "
                   "combine_effects(method_re='chi2', use_t=False); run once by "
                   "tools/make_external_reference.py"),
    "tolerance": 1e-4,
    "studies": [{"effect": float(a), "variance": float(b)} for a, b in zip(d, var_d)],
    "fixed": {"effect": float(res.mean_effect_fe), "se": float(res.sd_eff_w_fe),
              "ci_low": float(ci[0][0]), "ci_high": float(ci[0][1])},
    "random": {"effect": float(res.mean_effect_re), "se": float(res.sd_eff_w_re),
               "ci_low": float(ci[1][0]), "ci_high": float(ci[1][1])},
    "Q": float(res.q),
    "tau2": float(res.tau2),
}
(ROOT / "tests/data/external_reference.json").write_text(json.dumps(out, indent=2) + "\n")
print(json.dumps(out, indent=2))
