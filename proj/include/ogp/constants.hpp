#pragma once

#include <cstdint>
#include <vector>

#include "ogp/common.hpp"
#include "ogp/overlap.hpp"

namespace ogp {

double iota(double beta);  // beta / (1 - beta e^{-(beta-1)}), beta > 1

struct KappaSolution {
    double kappa_star = 0, beta_star = 0, residual = 0;  // residual of beta*^2 e^{-(beta*-1)} = 1
    double kappa = 0, beta_min = 0, beta_max = 0, beta_minus = 0, beta_plus = 0;
    double eps = 0, eps_grid_step = 0;
    double res_min = 0, res_max = 0;  // |iota(beta_min/max) - kappa|
};

KappaSolution kappa_star();
KappaSolution solve_kappa(double kappa, uint32_t grid = 100000);

double psi_n(uint32_t N, double lambda);
struct PsiStar {
    double lambda = 0, value = 0, derivative = 0;  // derivative at the minimizer (central difference)
};
PsiStar psi_star(uint32_t N);

// P[Pois(lambda) > N], accurate for small lambda
double poisson_tail(uint32_t N, double lambda);

// log 2 + H(pi) - kappa (log k / k) energy(pi); pi must come from k+1 assignments
double free_entropy_bracket(const OverlapProfile& p, double kappa, uint64_t budget = kEnergyBudget);
// canonical tuple with y^0 = T^n realizing the profile
std::vector<Assignment> assignments_from_profile(const OverlapProfile& p);

// finite q-model: xi takes atom a with probability weight[a], q(xi) = q[a]
struct QModel {
    std::vector<double> weight, q;
    double mean_entropy() const;
};
QModel p_n_model(uint32_t N, double s);
// s with E H(p_N(., s)) = target; throws when target exceeds log 2
double p_n_solve_entropy(uint32_t N, double target);

double dart_threshold(uint64_t k);  // log k + log log k

struct ChernoffEstimate {
    double p = 0;
    Interval ci;
    uint64_t samples = 0;
    bool exact = false;
};
// exact for models with at most two distinct nonzero u values
ChernoffEstimate chernoff_exact(const QModel& q, uint64_t k);
ChernoffEstimate chernoff_monte_carlo(const QModel& q, uint64_t k, uint64_t samples, uint64_t seed);

double f_value(const QModel& q, uint64_t k, double p);
double chernoff_bound(double beta);  // 1 - beta e^{-(beta-1)}

struct FMinimum {
    double s = 0, f = 0, p = 0;
};
// min over s of F(p_N(., s)) with the exact evaluator on a log grid, then local refinement
FMinimum minimize_f(uint32_t N, uint64_t k, uint32_t grid = 400);

}  // namespace ogp
