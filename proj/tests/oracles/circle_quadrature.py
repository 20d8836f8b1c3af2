"""Riemann-sum oracle for the kernel integrals on the unit circle and the
unit sphere (chordal Gaussian kernel). Produces the noise-free bias of the
estimator (2/eps)*Delta f for f = sin(theta) and the expected degree ratio
d(u)*vol/((N-1)*(2*pi*eps)^(m/2)). Output is frozen into
tests/oracle_values.hpp. Independent of the C++ code path: it never forms a
graph, only one-dimensional quadratures of the kernel."""
import math
import numpy as np

M = 2_000_000  # periodic Riemann sum nodes (spectrally accurate)

def circle_moments(eps):
    t = np.arange(M) * (2 * math.pi / M)
    w = np.exp(-(1 - np.cos(t)) / eps)  # ||u-v||^2 = 2 - 2 cos t
    h = 2 * math.pi / M
    return (w.sum() * h, (w * np.cos(t)).sum() * h)

def circle_bias(eps):
    c0, c1 = circle_moments(eps)
    # (2/eps)*Delta f = (2/eps)(c1/c0 - 1) sin(theta); exact is -sin(theta)
    return abs((2 / eps) * (c1 / c0 - 1) + 1)

def circle_ratio_inf(eps):
    c0, _ = circle_moments(eps)
    return c0 / math.sqrt(2 * math.pi * eps)

def sphere_ratio_inf(eps):
    # midpoint rule on the polar angle; kernel depends only on it
    K = 2_000_000
    t = (np.arange(K) + 0.5) * (math.pi / K)
    integral = 2 * math.pi * (np.exp(-(1 - np.cos(t)) / eps) * np.sin(t)).sum() * (math.pi / K)
    return integral / (2 * math.pi * eps)

ladder = [0.04, 0.02, 0.01, 0.005]
biases = {e: circle_bias(e) for e in ladder}
for e in ladder:
    print(f"circle_bias eps={e}: {biases[e]!r}  bias/sqrt(eps)={biases[e]/math.sqrt(e)!r}")
C = max(biases[e] / math.sqrt(e) for e in ladder)
print("calibrated C =", repr(C))
print("bound at eps=0.005:", repr(C * math.sqrt(0.005)))
print("bound at eps=1e-3 :", repr(C * math.sqrt(1e-3)), " true bias", repr(circle_bias(1e-3)))

def circle_grid_ratio(eps, N):
    return N / (N - 1) * circle_ratio_inf(eps)

def circle_random_ratio(eps, N):
    return circle_ratio_inf(eps) + 2 * math.pi / ((N - 1) * math.sqrt(2 * math.pi * eps))

r = circle_grid_ratio(1e-3, 5000)
print("circle grid N=5000 eps=1e-3 expected ratio - 1:", repr(r - 1), " delta(1.5x) =", repr(1.5 * abs(r - 1)))
r = circle_random_ratio(0.05, 20000)
print("circle random N=20000 eps=0.05 expected ratio - 1:", repr(r - 1), " delta(1.5x) =", repr(1.5 * abs(r - 1)))
s = sphere_ratio_inf(0.05)
self_loop = 4 * math.pi / ((20000 - 1) * 2 * math.pi * 0.05)
print("sphere eps=0.05 kernel ratio - 1:", repr(s - 1), " exact 1-exp(-2/eps) - 1 =", repr(-math.exp(-2 / 0.05)))
print("sphere random N=20000 expected ratio - 1:", repr(s - 1 + self_loop), " curvature prediction eps/3 =", repr(0.05 / 3))
