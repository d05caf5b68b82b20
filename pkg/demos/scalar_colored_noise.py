"""
Scalar colored noise from first principles
==========================================

Walks the smallest interesting example end to end: a one-state noise
model with A = 0.5 and every other block equal to 1, driven over a unit
channel by an iid unit-power input. Everything here can be checked by
hand, which is the point.

For this model the noise predictor is exact in the limit (Sigma* = 0,
so logdet K_Ihat -> log 1 = 0) while the joint predictor settles at
pi* = 0.5 and K_I = 2.5, giving a rate of 0.5 * ln 2.5 per use.
"""
import numpy as np

from riccati_capacity import (
    NoiseModel, Channel, iid_input,
    to_quadruple, build_augmented,
    are_solve, dre_run,
    feasibility_report,
    finite_n_rate, asymptotic_rate,
)

a = 0.5
noise = NoiseModel(A=a, B=1.0, C=1.0, N=1.0, K_W=1.0)
input_model = iid_input(K_Z=[[1.0]])
channel = Channel(H=[[1.0]], kappa=1.0)

print("model: S_{t+1} = %.1f S_t + W_t,  V_t = S_t + W_t,  Y_t = X_t + V_t" % a)
print()

# The noise predictor alone. Because the same W_t feeds state and
# output, the cross term makes the one-step prediction exact in the
# limit: the error recursion contracts to zero.
quad = to_quadruple(noise)
sol = are_solve(quad, tol=1e-13)
print("noise prediction error Sigma* = %.3e   (exactly 0 for this model)" % sol.P_star[0, 0])
print("closed-loop pole = %.6f            (A - gain*C = a - 1)" % sol.closed_loop[0, 0])

# Watch the finite-horizon error covariance get there. dre_run iterates
# the covariance difference equation from the supplied start.
seq = dre_run(quad, P_1=np.array([[1.0]]), horizon=6)
print("Sigma_t from Sigma_1 = 1:", np.round([P[0, 0] for P in seq], 6))
print()

# Admissibility: detectability and stabilizability of the noise pair
# and of the augmented pair, plus stability of the input state matrix.
rep = feasibility_report(noise, input_model, channel)
print("member of the admissible class:", rep.member_of_P_infinity)
print()

# Finite blocklengths. The running average climbs toward the limit;
# the joint predictor is deadbeat here so it settles almost at once.
for n in (1, 2, 5, 10, 50):
    r = finite_n_rate((noise, input_model), channel, n)
    print("n = %3d   rate = %.10f nats   power = %.6f" % (n, r.rate_nats, r.power))

limit = asymptotic_rate(noise, input_model, channel)
print()
print("asymptotic rate   = %.12f nats" % limit.rate_nats)
print("0.5 * ln 2.5      = %.12f nats" % (0.5 * np.log(2.5)))
print("K_I = %.4f, K_Ihat = %.4f" % (limit.K_I[0, 0], limit.K_Ihat[0, 0]))

# The augmented state is (Xi, S); with an iid input Xi is empty, so the
# joint steady state is the 1x1 block pi* solving pi^2 + 1.5 pi - 1 = 0.
aug = build_augmented(noise, input_model, channel)
pi_star = limit.Pi_star[0, 0]
print("pi* = %.6f,  residual of pi^2 + 1.5 pi - 1: %.2e"
      % (pi_star, pi_star**2 + 1.5 * pi_star - 1.0))
print("augmented state split: n_xi = %d, n_s = %d" % (aug.n_xi, aug.n_s))
