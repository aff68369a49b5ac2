"""From descriptors to a condensed histogram series, then to change-points.

Descriptor extraction is out of scope, so we fake it: frames in the first
half of the clip draw descriptors near one set of prototypes, frames in the
second half near another. The rest is the real pipeline.
"""

import numpy as np

from vidcpd.bovw import DescriptorSet, build_codebook, build_pyramid, pyramid_match_kernel, soft_vq
from vidcpd.condense import condense_codebook, condense_series
from vidcpd.detect import MultiConfig, hist_detect, mse_multi_detect
from vidcpd.detect.mse import MseConfig
from vidcpd.series import HistogramSeries

rng = np.random.default_rng(5)
dim, per_frame = 8, 40
protos = {0: rng.normal(-1.5, 1, (4, dim)), 1: rng.normal(1.5, 1, (4, dim))}


def frame(state):
    p = protos[state][rng.integers(0, 4, per_frame)]
    return DescriptorSet(p + 0.4 * rng.normal(size=p.shape), rng.random((per_frame, 2)))


states = np.r_[np.zeros(60, int), np.ones(60, int)]
frames = [frame(s) for s in states]

# One codebook half per state, learned from labeled training frames.
neg = DescriptorSet(np.vstack([frame(0).vectors for _ in range(10)]))
pos = DescriptorSet(np.vstack([frame(1).vectors for _ in range(10)]))
cb = build_codebook(neg, pos, K=6, seed=0)
print("codebook:", cb.size, "centroids")

hist = HistogramSeries(np.vstack([soft_vq(f, cb, 35) for f in frames]))
a = condense_codebook(cb, cutoff=1.0, depth=2)
small = condense_series(hist, a)
print(f"condensed {hist.n_bins} bins down to {small.n_bins}")

print("chi2:", hist_detect(small, MultiConfig("chi2", 0.001, 7)).times.tolist())

# The match threshold is a multiple of the series' own frame-to-frame jitter.
# The published multiple (20) was tuned on real footage and is too strict for
# this clean toy clip; 5 is plenty.
for constant in (20.0, 5.0):
    cps = hist_detect(small, MultiConfig("match", constant, 10))
    print(f"match, constant {constant:g}:", cps.times.tolist())

# Summing the split statistic over bins and keeping the one-bin p-value makes
# the multivariate binary split eager: expect extra splits on top of the true one.
print("mse-multi:", mse_multi_detect(small, MseConfig(input_kind="scores")).times.tolist())

# The pyramid match kernel compares two frames with spatial layout taken into account.
a0, a1, b0 = (build_pyramid(f, cb, L=2) for f in (frames[0], frames[1], frames[-1]))
print(f"kernel same state {pyramid_match_kernel(a0, a1):.1f}, "
      f"different state {pyramid_match_kernel(a0, b0):.1f}")
