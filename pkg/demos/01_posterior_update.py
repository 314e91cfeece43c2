"""
Posterior update from cumulative counts
=======================================

Only three numbers matter to the model: the number of days ``m``, the
cumulative positives ``X`` and the cumulative tests ``N``.  Here we use the
Indiana totals through early July 2020.
"""

from positivity import (
    PriorSpec,
    SufficientStats,
    bayes_estimate_p,
    bayes_estimate_theta,
    posterior_update,
    predictive_moments_k,
)

prior = PriorSpec(a=1, b=1, c=1, d=1, r=3)
stats = SufficientStats(m=109, X=46907, N=522946)
post = posterior_update(prior, stats)

print("posterior parameters:", post.a_m, post.b_m, post.c_m, post.d_m)
print(f"cumulative PPT X/N       : {stats.cumulative_ppt:.5f}")
print(f"posterior mean of p      : {bayes_estimate_p(post):.5f}")
print(f"posterior mean of theta  : {bayes_estimate_theta(post):.7f}")

mean_k, var_k = predictive_moments_k(post)
print(f"next-day tests: mean {mean_k:.2f}, sd {var_k ** 0.5:.1f}")

###############################################################################
# With half a million tests the prior barely matters.

for a, b in [(0.5, 0.5), (1, 1), (10, 10), (10, 0.5)]:
    p = bayes_estimate_p(posterior_update(PriorSpec(a, b, 1, 1, 3), stats))
    print(f"a={a:<4} b={b:<4} -> p_hat={p:.6f}")
