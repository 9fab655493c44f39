"""Reference values for the numerical-kernel tests, evaluated with mpmath at
50 significant digits. Inputs are taken as the exact binary doubles the Rust
code sees. Regenerate with:

    python3 crates/core/tests/oracles/generate.py > crates/core/tests/oracles/frozen.rs
"""
from mpmath import mp, mpf, log, erfc, sqrt, betainc, nstr

mp.dps = 50


def martingale_log_p(s, n, tau):
    s, tau = mpf(s), mpf(tau)
    eps = tau - tau * tau
    t = (s - 2) / 8 - eps
    if t <= 0:
        return mpf(0)
    a, a_bar = mpf(3) / 4 + eps, mpf(1) / 4 - eps
    t = min(t, a_bar)
    rate = (a + t) * log(a / (a + t))
    if a_bar - t > 0:
        rate += (a_bar - t) * log(a_bar / (a_bar - t))
    return min(n * rate, mpf(0))


S = [2.02, 2.05, 2.1, 2.2, 2.3, 2.5, 2.8, 3.2, 3.6, 3.95]
N = [100, 1000, 10000, 55568, 1000000]
TAU = [0.0, 6.3e-4, 1e-5, 0.01, 0.05]

print("// Generated by generate.py; do not edit.")
print()
print("#![allow(clippy::excessive_precision)]")
print()
print("/// (S, N, tau, ln P) for the martingale bound.")
print("pub const MARTINGALE: [(f64, u64, f64, f64); %d] = [" % (len(S) * len(N)))
k = 0
for s in S:
    for n in N:
        tau = TAU[k % len(TAU)]
        k += 1
        print("    (%r, %d, %r, %s)," % (s, n, tau, nstr(martingale_log_p(s, n, tau), 20, min_fixed=-30, max_fixed=30)))
print("];")
print()
print("/// (z, two-sided normal p-value).")
ZS = [0.0, 0.1, 0.359, 0.5, 1.0, 1.959963984540054, 2.5, 3.0, 5.0, 8.0]
print("pub const NORMAL: [(f64, f64); %d] = [" % len(ZS))
for z in ZS:
    print("    (%r, %s)," % (z, nstr(erfc(mpf(z) / sqrt(2)), 20)))
print("];")
print()
print("/// (t, dof, two-sided Student-t p-value).")
TS = [(0.5, 5.0), (2.0, 10.0), (0.661, 9998.0), (2.46, 3709.0), (1.0, 298.0), (3.5, 30.0), (0.1, 2.0), (4.0, 100.0)]
print("pub const STUDENT_T: [(f64, f64, f64); %d] = [" % len(TS))
for t, nu in TS:
    t_, nu_ = mpf(t), mpf(nu)
    p = betainc(nu_ / 2, mpf(1) / 2, 0, nu_ / (nu_ + t_ * t_), regularized=True)
    print("    (%r, %r, %s)," % (t, nu, nstr(p, 20)))
print("];")
