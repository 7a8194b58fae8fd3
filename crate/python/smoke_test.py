"""Smoke test for the spopo extension module.

Build and run from the repository root:

    cargo build --release -p spopo-python --features extension-module
    cp target/release/libspopo.so python/spopo.so
    python3 python/smoke_test.py
"""

import math

import spopo


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


cav = spopo.CavityConfig(0.8894)
gain, branch = spopo.threshold_gain(cav)
close(gain, -math.log(0.8894), 1e-12)
assert branch == "even"

g = 0.5 * gain
c, s = spopo.comb_io(g, 0.3, cav)
close(abs(c) ** 2 - abs(s) ** 2, 1.0, 1e-10)
assert spopo.epr_pair_check(g, 0.05, cav) < 1.0

cov = spopo.PulseCovariance(g, cav.r, 16)
direct = spopo.min_variance(g, cav.r, 16, method="direct")
trans = spopo.min_variance(g, cav.r, 16)
close(direct["sigma2"], trans["sigma2"], 1e-10)
assert trans["sigma2"] < cov.v_minus[0][0]
assert cov.duan_sum(0, 10) > 2.0

alpha = [trans["eigvec"]]
f = spopo.fisher_information(alpha, [cov.v_minus])
close(f, 2.0 / trans["sigma2"], 1e-8)

curves = spopo.improvement_curve(cav, [0.5, 0.8], 50)
close(curves[0]["asymptote"], 3.003, 0.01)
assert all(b >= a for a, b in zip(curves[1]["improvement"], curves[1]["improvement"][1:]))

# Double Gaussian kernel: geometric Schmidt spectrum.
n, wmax, a, b = 81, 8.0, 0.9, 0.1
dw = 2 * wmax / (n - 1)
ws = [-wmax + i * dw for i in range(n)]
kernel = [[complex(math.exp(-a * (x + y) ** 2 - b * (x - y) ** 2) * dw / (2 * math.pi), 0) for y in ws] for x in ws]
basis = spopo.schmidt_decompose(kernel, wmax)
mu = (math.sqrt(a) - math.sqrt(b)) / (math.sqrt(a) + math.sqrt(b))
close(basis["gains"][1] / basis["gains"][0], mu, 1e-6)
assert basis["orthonormality_error"] < 1e-10

values, w = spopo.takagi([[1 + 1j, 0.5], [0.5, 2j]])
assert values[0] >= values[1] >= 0

try:
    spopo.PulseCovariance(1.0, 0.8894, 3)
except spopo.SpopoError as e:
    assert str(e).startswith("above_threshold")
else:
    raise AssertionError("expected above-threshold error")

print("spopo smoke test passed")
