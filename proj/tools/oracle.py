#!/usr/bin/env python3
"""Reference values frozen into the C++ tests.

Independent of the library: mpmath quadrature and special functions at
50 digits, numpy dense linear algebra. Run with `python3 tools/oracle.py`.
"""
import mpmath as mp
import numpy as np

mp.mp.dps = 50


def Q(x):
    return mp.erfc(x / mp.sqrt(2)) / 2


def zzb_quad(gamma, T):
    f = lambda h: h * (T - h) * Q(gamma * h)
    return mp.quad(f, [0, min(T, 1 / gamma), T]) / T


def show(name, value):
    print(f"{name} = {mp.nstr(mp.mpf(value), 17)}")


show("Q(1)", mp.quad(lambda t: mp.exp(-t * t / 2), [1, mp.inf]) / mp.sqrt(2 * mp.pi))
show("Q(3)", Q(3))
show("Q(-2)", Q(-2))
show("Q(8)", Q(8))
show("Q(20)", Q(20))
for a, x in [(1.5, 0.5), (1.5, 3.0), (2.0, 1.0), (2.0, 7.5), (0.5, 0.1), (3.7, 12.0)]:
    show(f"P({a},{x})", mp.gammainc(a, 0, x, regularized=True))

for g in (0.1, 1, 10):
    for T in (1, 10, 100):
        show(f"zzb_q_linear(gamma={g},T={T})", zzb_quad(mp.mpf(g), mp.mpf(T)))
show("zzb_q_linear(gamma=1,T=1e-3)", zzb_quad(mp.mpf(1), mp.mpf("1e-3")))

# Mixture location Fisher information, weights (0.7, 0.3), variances (1, 625).
w1, w2, v1, v2 = mp.mpf("0.7"), mp.mpf("0.3"), mp.mpf(1), mp.mpf(625)
pdf = lambda x: w1 * mp.npdf(x, 0, mp.sqrt(v1)) + w2 * mp.npdf(x, 0, mp.sqrt(v2))
dpdf = lambda x: -x * (w1 * mp.npdf(x, 0, mp.sqrt(v1)) / v1 + w2 * mp.npdf(x, 0, mp.sqrt(v2)) / v2)
show("fisher(0.7,0.3;1,625)", mp.quad(lambda x: dpdf(x) ** 2 / pdf(x), [-mp.inf, -5, 0, 5, mp.inf]))

# Example 1 style asymptotic bound with dense matrices (K = 5).
K = 5
h = np.ones(K)
S = 0.1 * np.eye(K)
Sc = 0.016 * np.diag(np.linspace(1, 5, K))
Si = np.linalg.inv(S)
a = h @ Si @ h
print(f"ex1_asymptotic_K5 = {(a + h @ Si @ Sc @ Si @ h) / a**2:.17g}")
print(f"ex1_matched_K5 = {1.0 / (h @ np.linalg.inv(S + Sc) @ h):.17g}")

# Gaussian Pe for a 3-sample nonlinear pair, dense covariances.
H = lambda t: np.array([np.sin(t), t * t, 1.0 + 0.5 * t])
Sig = np.array([[1.0, 0.2, 0.0], [0.2, 2.0, 0.3], [0.0, 0.3, 1.5]])
Sig_t = np.array([[1.3, 0.1, 0.0], [0.1, 1.0, -0.2], [0.0, -0.2, 2.5]])
mu = np.array([0.1, -0.2, 0.3])
mu_t = np.array([0.0, 0.1, -0.1])
to, de = 0.4, 0.7
h0, h1 = H(to), H(to + de)
Si = np.linalg.inv(Sig)
d = h0 - h1
Sfun = lambda hs: 0.5 * (h1 + mu) @ Si @ (h1 + mu) - 0.5 * (h0 + mu) @ Si @ (h0 + mu) + hs @ Si @ d
mn = mu_t @ Si @ d
sn = mp.sqrt(d @ Si @ Sig_t @ Si @ d)
pe = Q((Sfun(h0) + mn) / sn) / 2 + Q((-Sfun(h1) - mn) / sn) / 2
show("pe_gaussian_nonlinear", pe)
