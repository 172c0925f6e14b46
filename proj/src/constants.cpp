#include "ogp/constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/beta.hpp>

namespace ogp {

namespace {

template <class F>
double bisect(F f, double lo, double hi, double tol = 1e-15) {
    double flo = f(lo);
    for (int it = 0; it < 300 && hi - lo > tol * std::max(1.0, std::fabs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

template <class F>
double golden_min(F f, double a, double b, double tol = 1e-12) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * std::max(1.0, std::fabs(c))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double iota(double beta) {
    if (!(beta > 1)) throw std::invalid_argument("iota needs beta > 1");
    return beta / (1 - beta * std::exp(-(beta - 1)));
}

KappaSolution kappa_star() {
    KappaSolution s;
    s.beta_star = bisect([](double b) { return b * b * std::exp(-(b - 1)) - 1; }, 2.0, 5.0);
    s.kappa_star = iota(s.beta_star);
    s.residual = std::fabs(s.beta_star * s.beta_star * std::exp(-(s.beta_star - 1)) - 1);
    return s;
}

KappaSolution solve_kappa(double kappa, uint32_t grid) {
    KappaSolution s = kappa_star();
    if (!(kappa > s.kappa_star)) throw std::invalid_argument("kappa must exceed kappa*");
    s.kappa = kappa;
    auto g = [kappa](double b) { return iota(b) - kappa; };
    double lo = 1.0 + 1e-15;
    while (g(lo) < 0) lo = 1.0 + (lo - 1.0) * 0.5;
    s.beta_min = bisect(g, lo, s.beta_star);
    double hi = s.beta_star + 1;
    while (g(hi) < 0) hi *= 2;
    s.beta_max = bisect(g, s.beta_star, hi);
    s.res_min = std::fabs(iota(s.beta_min) - kappa);
    s.res_max = std::fabs(iota(s.beta_max) - kappa);
    s.beta_minus = 0.5 * (s.beta_min + s.beta_star);
    s.beta_plus = 0.5 * (s.beta_max + s.beta_star);
    s.eps_grid_step = (s.beta_plus - s.beta_minus) / grid;
    s.eps = INFINITY;
    for (uint32_t i = 0; i <= grid; ++i) {
        double b = s.beta_minus + i * s.eps_grid_step;
        s.eps = std::min(s.eps, kappa * (1 - b * std::exp(-(b - 1))) - b);
    }
    return s;
}

double poisson_tail(uint32_t N, double lambda) {
    if (lambda <= 0) return 0;
    if (lambda < N + 30.0) {
        double term = std::exp(-lambda + (N + 1) * std::log(lambda) - std::lgamma(N + 2.0));
        double sum = 0;
        for (uint32_t j = N + 1; j < N + 2000; ++j) {
            sum += term;
            if (term < 1e-18 * sum && j > lambda) break;
            term *= lambda / (j + 1);
        }
        return sum;
    }
    double term = std::exp(-lambda), head = 0;
    for (uint32_t j = 0; j <= N; ++j) {
        head += term;
        term *= lambda / (j + 1);
    }
    return 1 - head;
}

double psi_n(uint32_t N, double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("psi needs lambda > 0");
    return lambda / (N + 1) / poisson_tail(N, lambda);
}

PsiStar psi_star(uint32_t N) {
    PsiStar p;
    if (N == 0) {
        // increasing on (0, inf) with infimum 1 at 0+
        p.lambda = 0;
        p.value = 1;
        p.derivative = 0.5;
        return p;
    }
    double best = 0, bv = INFINITY;
    for (int i = 0; i <= 4000; ++i) {
        double l = 1e-3 * std::pow(6e4, i / 4000.0);
        double v = psi_n(N, l);
        if (v < bv) {
            bv = v;
            best = l;
        }
    }
    p.lambda = golden_min([N](double l) { return psi_n(N, l); }, best * 0.99, best * 1.01, 1e-13);
    p.value = psi_n(N, p.lambda);
    double h = 1e-5 * p.lambda;
    p.derivative = (psi_n(N, p.lambda + h) - psi_n(N, p.lambda - h)) / (2 * h);
    return p;
}

std::vector<Assignment> assignments_from_profile(const OverlapProfile& p) {
    std::vector<Assignment> ys(p.l, Assignment(p.n, Sym::T));
    uint32_t i = 0;
    for (auto& e : p.entries)
        for (uint64_t c = 0; c < e.second; ++c, ++i)
            for (uint32_t t = 0; t < p.l; ++t) ys[t][i] = (e.first >> t) & 1u ? Sym::T : Sym::F;
    if (i != p.n) throw std::invalid_argument("profile counts do not sum to n");
    return ys;
}

double free_entropy_bracket(const OverlapProfile& p, double kappa, uint64_t budget) {
    if (p.l < 2) throw std::invalid_argument("bracket needs at least two assignments");
    double k = p.l - 1;
    std::vector<Assignment> ys = assignments_from_profile(p);
    return std::log(2.0) + entropy(p) - kappa * std::log(k) / k * energy_exact(ys, budget);
}

double QModel::mean_entropy() const {
    double h = 0;
    for (size_t a = 0; a < q.size(); ++a) h += weight[a] * binary_entropy(q[a]);
    return h;
}

QModel p_n_model(uint32_t N, double s) {
    if (!(s >= 0 && s <= 1)) throw std::invalid_argument("s must lie in [0,1]");
    double w = std::pow(s, double(N));
    return QModel{{w, 1 - w}, {std::min(s, 0.5), 0.0}};
}

double p_n_solve_entropy(uint32_t N, double target) {
    if (!(target > 0)) throw std::invalid_argument("entropy target must be positive");
    if (target > std::log(2.0)) throw std::invalid_argument("entropy target above log 2 is unreachable");
    return bisect([N, target](double s) { return p_n_model(N, s).mean_entropy() - target; }, 0.0, 1.0, 1e-16);
}

double dart_threshold(uint64_t k) { return std::log(double(k)) + std::log(std::log(double(k))); }

double chernoff_bound(double beta) { return 1 - beta * std::exp(-(beta - 1)); }

double f_value(const QModel& q, uint64_t k, double p) {
    return (std::log(2.0) + double(k) * q.mean_entropy()) / (p * std::log(double(k)));
}

namespace {

struct Category {
    double prob, u;
};

std::vector<Category> categories(const QModel& q) {
    std::vector<Category> cats;
    double zero = 0;
    auto add = [&](double p, double u) {
        if (p <= 0) return;
        if (u <= 0) {
            zero += p;
            return;
        }
        for (auto& c : cats)
            if (c.u == u) {
                c.prob += p;
                return;
            }
        cats.push_back({p, u});
    };
    for (size_t a = 0; a < q.q.size(); ++a) {
        double x = q.q[a], w = q.weight[a];
        if (x <= 0 || x >= 1) {
            zero += w;
            continue;
        }
        add(w * x, -std::log(x));
        add(w * (1 - x), -std::log1p(-x));
    }
    std::sort(cats.begin(), cats.end(), [](auto& a, auto& b) { return a.u > b.u; });
    return cats;
}

// P[Bin(n, p) >= l]
double binom_upper(uint64_t n, double p, uint64_t l) {
    if (l == 0) return 1;
    if (l > n || p <= 0) return 0;
    if (p >= 1) return 1;
    return boost::math::ibeta(double(l), double(n - l + 1), p);
}

}  // namespace

ChernoffEstimate chernoff_exact(const QModel& q, uint64_t k) {
    std::vector<Category> cats = categories(q);
    if (cats.size() > 2) throw std::invalid_argument("exact evaluator supports two nonzero u values");
    const double L = dart_threshold(k);
    ChernoffEstimate est;
    est.exact = true;
    if (cats.empty()) {
        est.p = L <= 0 ? 1 : 0;
        est.ci = {est.p, est.p};
        return est;
    }
    const double p1 = std::min(1.0, cats[0].prob), u1 = cats[0].u;
    const double u2 = cats.size() > 1 ? cats[1].u : 0;
    const double p2c = cats.size() > 1 && p1 < 1 ? std::min(1.0, cats[1].prob / (1 - p1)) : 0;
    // j = number of u1 draws; enough u1 draws alone clear the threshold
    uint64_t jstar = uint64_t(std::ceil(L / u1));
    while (jstar > 0 && (jstar - 1) * u1 >= L) --jstar;
    while (jstar * u1 < L) ++jstar;
    double total = binom_upper(k, p1, jstar);
    boost::math::binomial_distribution<double> bin(double(k), p1);
    double mu = k * p1, sd = std::sqrt(k * p1 * (1 - p1));
    uint64_t jlo = uint64_t(std::max(0.0, std::floor(mu - 40 * sd - 50)));
    uint64_t jhi = std::min<uint64_t>({jstar, k + 1, uint64_t(std::ceil(mu + 40 * sd + 50))});
    if (u2 > 0)
        for (uint64_t j = jlo; j < jhi; ++j) {
            double pmf = boost::math::pdf(bin, double(j));
            if (pmf == 0) continue;
            double need = L - j * u1;
            uint64_t l = uint64_t(std::ceil(need / u2));
            while (l > 0 && (l - 1) * u2 + j * u1 >= L) --l;
            while (l * u2 + j * u1 < L) ++l;
            total += pmf * binom_upper(k - j, p2c, l);
        }
    est.p = std::min(1.0, total);
    est.ci = {est.p, est.p};
    return est;
}

ChernoffEstimate chernoff_monte_carlo(const QModel& q, uint64_t k, uint64_t samples, uint64_t seed) {
    std::vector<Category> cats = categories(q);
    const double L = dart_threshold(k);
    const int batches = 64;
    uint64_t hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(dynamic, 1)
    for (int b = 0; b < batches; ++b) {
        Rng rng = make_rng(seed, 0xC400 + b);
        uint64_t lo = samples * b / batches, hi = samples * (b + 1) / batches;
        for (uint64_t s = lo; s < hi; ++s) {
            uint64_t left = k;
            double mass = 1, sum = 0;
            for (auto& c : cats) {
                if (left == 0 || mass <= 0) break;
                double p = std::min(1.0, c.prob / mass);
                uint64_t x = std::binomial_distribution<uint64_t>(left, p)(rng);
                sum += x * c.u;
                left -= x;
                mass -= c.prob;
            }
            hits += sum >= L;
        }
    }
    ChernoffEstimate est;
    est.samples = samples;
    est.p = samples ? double(hits) / samples : 0;
    est.ci = wilson_interval(hits, samples);
    return est;
}

FMinimum minimize_f(uint32_t N, uint64_t k, uint32_t grid) {
    auto eval = [&](double s) {
        QModel q = p_n_model(N, s);
        double p = chernoff_exact(q, k).p;
        return std::make_pair(p > 0 ? f_value(q, k, p) : INFINITY, p);
    };
    const double lo = 1e-7;
    FMinimum best{0, INFINITY, 0};
    uint32_t bi = 0;
    auto at = [&](uint32_t i) { return lo * std::pow(1 / lo, double(i) / grid); };
    for (uint32_t i = 0; i <= grid; ++i) {
        auto [f, p] = eval(at(i));
        if (f < best.f) {
            best = {at(i), f, p};
            bi = i;
        }
    }
    double a = at(bi == 0 ? 0 : bi - 1), b = at(std::min(grid, bi + 1));
    for (uint32_t i = 0; i <= 400; ++i) {
        double s = a + (b - a) * i / 400.0;
        auto [f, p] = eval(s);
        if (f < best.f) best = {s, f, p};
    }
    return best;
}

}  // namespace ogp
