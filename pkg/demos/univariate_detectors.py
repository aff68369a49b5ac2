"""Five detectors, one synthetic video.

We simulate nine minutes of classifier output (one score per second) with a
state flip at 2:00, 4:30 and 7:00, then ask each univariate detector where it
thinks the scene changed. Run with ``python3 demos/univariate_detectors.py``.
"""

from vidcpd import evaluate
from vidcpd.config import default_config
from vidcpd.detect import forecast_detect, hmm_detect, hmm_fit, mle_detect, mse_detect
from vidcpd.synthetic import SynthSpec, gen_labels, gen_scores, gen_states, separation_for_accuracy

mu = separation_for_accuracy(0.94)
spec = SynthSpec(540, change_indices=[120, 270, 420], score_means=(-mu, mu), seed=11)
states, truth = gen_states(spec)
scores = gen_scores(states, spec)
labels = gen_labels(states, 0.94, seed=11)
print("true change-points (s):", truth.times.tolist())

# The HMM needs parameters; here we simply fit them on the video itself.
params = hmm_fit(scores, seed=0)
print(f"fitted HMM means {params.mu.round(2)}, stay probabilities {params.A.diagonal().round(3)}")

found = {
    "mse": mse_detect(scores, default_config("mse")),
    "forecast-ar1": forecast_detect(scores, default_config("forecast-ar1")),
    "forecast-mean": forecast_detect(scores, default_config("forecast-mean")),
    "mle": mle_detect(labels, default_config("mle"))[1],
    "hmm": hmm_detect(scores, params),
}
for name, cps in found.items():
    c = evaluate(cps, truth, window=10)
    print(f"{name:>14}: {cps.times.tolist()}  "
          f"({c.true_matched}/{c.true_total} found, {c.predicted_matched}/{c.predicted_total} correct)")
