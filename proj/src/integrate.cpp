#include "statmanifold/integrate.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "statmanifold/rng.hpp"

namespace statmanifold {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad_integrand(double x) {
    throw IntegrationError("integrand is not finite at x = " + std::to_string(x));
}

struct QuadOutcome {
    double value;
    double error;
    long evaluations;
    bool converged;
};

// A narrow density can hide between the initial quadrature nodes (a
// gaussian with sigma = 0.01 keeps all its mass in a band no node of the
// infinite-range map touches), so integration is split at the density
// mode found on the probe grid: the peak then sits at a panel end where
// the adaptive refinement always sees it.
double density_mode(const ParametricFamily& family, const VectorXd& xi) {
    double best_x = 0.0, best = -kInf;
    for (double x : family.support().probe_grid()) {
        double l = family.log_density(x, xi);
        if (l > best) {
            best = l;
            best_x = x;
        }
    }
    return best_x;
}

QuadOutcome quadrature(const Support& s, const std::function<double(double)>& f,
                       const IntegrationConfig& cfg, double split = kInf) {
    long evals = 0;
    auto counted = [&](double x) {
        ++evals;
        double v = f(x);
        if (std::isnan(v)) bad_integrand(x);
        return v;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double value = 0.0, error = 0.0;
    std::vector<std::array<double, 2>> pieces;
    if (s.lower < split && split < s.upper)
        pieces = {{s.lower, split}, {split, s.upper}};
    else
        pieces = {{s.lower, s.upper}};
    for (const auto& p : pieces) {
        double e = 0.0;
        value += GK::integrate(counted, p[0], p[1], cfg.max_quad_depth, cfg.rel_tol, &e);
        error += e;
    }
    bool converged = error <= std::max(cfg.abs_tol, 10.0 * cfg.rel_tol * std::abs(value));
    return {value, error, evals, converged};
}

// Sum over the naturals with an adaptive cutoff: stop once the running
// mass is within 1e-13 of one and terms have fallen below the tail bound.
QuadOutcome natural_sum(const std::function<double(double)>& weight,
                        const std::function<double(double)>& f,
                        const IntegrationConfig& cfg) {
    double sum = 0.0;
    double mass = 0.0;
    double fmax = 0.0;
    double prev_w = 0.0;
    long x = 0;
    bool converged = false;
    for (; x < cfg.max_terms; ++x) {
        double w = weight(static_cast<double>(x));
        if (std::isnan(w)) bad_integrand(static_cast<double>(x));
        if (w > 0.0) {
            double fx = f(static_cast<double>(x));
            if (std::isnan(fx)) bad_integrand(static_cast<double>(x));
            sum += w * fx;
            fmax = std::max(fmax, std::abs(fx));
        }
        mass += w;
        // past the mode the terms decay; require a few vanishing terms
        if (x > 2 && w < prev_w && mass >= 1.0 - 1e-13 && w < 1e-18) {
            converged = true;
            ++x;
            break;
        }
        prev_w = w;
    }
    double tail = std::max(1.0 - mass, 0.0);
    double err = std::abs(tail) * std::max(fmax, 1.0) + 1e-16 * std::abs(sum);
    return {sum, err, x, converged};
}

// ---- vector quadrature -------------------------------------------------

// Change of variable onto a finite t-interval; infinite ends use the
// rational map x = t/(1-t^2) and its one-sided variants.
struct IntervalMap {
    double ta, tb;
    std::function<double(double)> x_of_t;
    std::function<double(double)> jacobian;
};

IntervalMap make_interval_map(double lo, double hi) {
    bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
    if (!lo_inf && !hi_inf)
        return {lo, hi, [](double t) { return t; }, [](double) { return 1.0; }};
    if (lo_inf && hi_inf)
        return {-1.0, 1.0,
                [](double t) { return t / (1.0 - t * t); },
                [](double t) {
                    double d = 1.0 - t * t;
                    return (1.0 + t * t) / (d * d);
                }};
    if (!lo_inf)
        return {0.0, 1.0,
                [lo](double t) { return lo + t / (1.0 - t); },
                [](double t) { return 1.0 / ((1.0 - t) * (1.0 - t)); }};
    return {0.0, 1.0,
            [hi](double t) { return hi - t / (1.0 - t); },
            [](double t) { return -1.0 / ((1.0 - t) * (1.0 - t)); }};
}

class VectorQuadrature {
public:
    VectorQuadrature(std::function<void(double, std::vector<double>&)> f, int count)
        : f_(std::move(f)), count_(count) {}

    std::vector<double> run(double lo, double hi, const IntegrationConfig& cfg) {
        IntervalMap map = make_interval_map(lo, hi);
        std::vector<Panel> panels;
        const int initial = 8;
        for (int p = 0; p < initial; ++p) {
            double a = map.ta + (map.tb - map.ta) * p / initial;
            double b = map.ta + (map.tb - map.ta) * (p + 1) / initial;
            panels.push_back(evaluate(map, a, b));
        }
        const int max_panels = 2048;
        for (;;) {
            std::vector<double> total(count_, 0.0);
            double err_total = 0.0;
            for (const Panel& p : panels) {
                for (int c = 0; c < count_; ++c) total[c] += p.estimate[c];
                err_total += p.error;
            }
            double scale = 0.0;
            for (double v : total) scale = std::max(scale, std::abs(v));
            if (err_total <= std::max(cfg.abs_tol, cfg.rel_tol * scale) ||
                static_cast<int>(panels.size()) >= max_panels)
                return total;
            // split the worst panel (first of equal errors, for determinism)
            std::size_t worst = 0;
            for (std::size_t p = 1; p < panels.size(); ++p)
                if (panels[p].error > panels[worst].error) worst = p;
            Panel old = panels[worst];
            double mid = 0.5 * (old.a + old.b);
            panels[worst] = evaluate(map, old.a, mid);
            panels.insert(panels.begin() + static_cast<long>(worst) + 1,
                          evaluate(map, mid, old.b));
        }
    }

private:
    struct Panel {
        double a, b;
        std::vector<double> estimate;
        double error;
    };

    Panel evaluate(const IntervalMap& map, double a, double b) {
        namespace bq = boost::math::quadrature;
        const auto& kx = bq::gauss_kronrod<double, 15>::abscissa();  // 8 non-negative
        const auto& kw = bq::gauss_kronrod<double, 15>::weights();
        const auto& gw = bq::gauss<double, 7>::weights();  // nodes = kx[0,2,4,6]
        double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        std::vector<double> kron(count_, 0.0), gauss(count_, 0.0), val(count_);
        auto accumulate = [&](double t, double w, bool gauss_node, double gwt) {
            double x = map.x_of_t(t);
            double jac = std::abs(map.jacobian(t)) * half;
            f_(x, val);
            for (int c = 0; c < count_; ++c) {
                if (std::isnan(val[c])) bad_integrand(x);
                double v = val[c] * jac;
                kron[c] += w * v;
                if (gauss_node) gauss[c] += gwt * v;
            }
        };
        for (std::size_t i = 0; i < kx.size(); ++i) {
            bool gnode = (i % 2 == 0) && (i / 2 < gw.size());
            double gwt = gnode ? gw[i / 2] : 0.0;
            if (i == 0) {
                accumulate(mid, kw[0], gnode, gwt);
            } else {
                accumulate(mid + half * kx[i], kw[i], gnode, gwt);
                accumulate(mid - half * kx[i], kw[i], gnode, gwt);
            }
        }
        double err = 0.0;
        for (int c = 0; c < count_; ++c) err = std::max(err, std::abs(kron[c] - gauss[c]));
        return Panel{a, b, kron, err};
    }

    std::function<void(double, std::vector<double>&)> f_;
    int count_;
};

}  // namespace

std::vector<double> expect_many(const ParametricFamily& family, const VectorXd& xi,
                                const std::function<void(double, std::vector<double>&)>& f,
                                int count, const IntegrationConfig& cfg) {
    family.require_in_domain(xi);
    const Support& s = family.support();
    auto weighted = [&](double x, std::vector<double>& out) {
        double w = std::exp(family.log_density(x, xi));
        if (w == 0.0) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        f(x, out);
        for (double& v : out) v *= w;
    };

    if (s.kind == Support::Kind::FiniteSet) {
        std::vector<double> total(count, 0.0), val(count);
        for (double x : s.points) {
            weighted(x, val);
            for (int c = 0; c < count; ++c) total[c] += val[c];
        }
        return total;
    }
    if (s.kind == Support::Kind::Naturals) {
        std::vector<double> total(count, 0.0), val(count);
        double mass = 0.0, prev_w = 0.0;
        for (long x = 0; x < cfg.max_terms; ++x) {
            double w = std::exp(family.log_density(static_cast<double>(x), xi));
            if (w > 0.0) {
                f(static_cast<double>(x), val);
                for (int c = 0; c < count; ++c) {
                    if (std::isnan(val[c])) bad_integrand(static_cast<double>(x));
                    total[c] += w * val[c];
                }
            }
            mass += w;
            if (x > 2 && w < prev_w && mass >= 1.0 - 1e-13 && w < 1e-18) break;
            prev_w = w;
        }
        return total;
    }
    VectorQuadrature q(weighted, count);
    double split = density_mode(family, xi);
    if (s.lower < split && split < s.upper) {
        std::vector<double> left = q.run(s.lower, split, cfg);
        std::vector<double> right = q.run(split, s.upper, cfg);
        for (int c = 0; c < count; ++c) left[static_cast<std::size_t>(c)] +=
            right[static_cast<std::size_t>(c)];
        return left;
    }
    return q.run(s.lower, s.upper, cfg);
}

std::string to_string(IntegrationMethod m) {
    switch (m) {
        case IntegrationMethod::Auto: return "auto";
        case IntegrationMethod::ExactSum: return "exact_sum";
        case IntegrationMethod::Quadrature: return "quadrature";
        case IntegrationMethod::MonteCarlo: return "monte_carlo";
    }
    return "?";
}

ExpectationResult integrate_raw(const Support& support,
                                const std::function<double(double)>& f,
                                const IntegrationConfig& cfg) {
    ExpectationResult r;
    switch (support.kind) {
        case Support::Kind::FiniteSet: {
            double sum = 0.0;
            for (double x : support.points) {
                double v = f(x);
                if (std::isnan(v)) bad_integrand(x);
                sum += v;
            }
            r.value = sum;
            r.error_estimate = 1e-15 * std::abs(sum) * static_cast<double>(support.points.size());
            r.method = IntegrationMethod::ExactSum;
            r.evaluations = static_cast<long>(support.points.size());
            return r;
        }
        case Support::Kind::Naturals: {
            double sum = 0.0;
            long x = 0;
            double prev = kInf;
            bool converged = false;
            for (; x < cfg.max_terms; ++x) {
                double v = f(static_cast<double>(x));
                if (std::isnan(v)) bad_integrand(static_cast<double>(x));
                sum += v;
                if (x > 2 && std::abs(v) < prev && std::abs(v) < 1e-18 * std::max(1.0, std::abs(sum))) {
                    converged = true;
                    ++x;
                    break;
                }
                prev = std::abs(v);
            }
            r.value = sum;
            r.error_estimate = converged ? 1e-15 * std::abs(sum) : std::abs(prev);
            r.method = IntegrationMethod::ExactSum;
            r.evaluations = x;
            r.converged = converged;
            return r;
        }
        case Support::Kind::Interval: {
            auto out = quadrature(support, f, cfg);
            r.value = out.value;
            r.error_estimate = out.error;
            r.method = IntegrationMethod::Quadrature;
            r.evaluations = out.evaluations;
            r.converged = out.converged;
            return r;
        }
    }
    throw std::logic_error("unreachable support kind");
}

ExpectationResult expect(const ParametricFamily& family, const VectorXd& xi,
                         const std::function<double(double)>& f,
                         const IntegrationConfig& cfg) {
    family.require_in_domain(xi);
    const Support& s = family.support();

    auto weight = [&](double x) { return std::exp(family.log_density(x, xi)); };
    auto weighted = [&](double x) {
        double w = weight(x);
        if (w == 0.0) return 0.0;  // outside the effective support
        double fx = f(x);
        if (std::isnan(fx)) bad_integrand(x);
        return w * fx;
    };

    IntegrationMethod method = cfg.method;
    if (method == IntegrationMethod::Auto) {
        method = s.is_discrete() ? IntegrationMethod::ExactSum : IntegrationMethod::Quadrature;
    }

    ExpectationResult r;
    switch (method) {
        case IntegrationMethod::ExactSum: {
            if (s.kind == Support::Kind::FiniteSet) {
                double sum = 0.0;
                for (double x : s.points) sum += weighted(x);
                r.value = sum;
                r.error_estimate = 1e-15 * (1.0 + std::abs(sum));
                r.evaluations = static_cast<long>(s.points.size());
            } else if (s.kind == Support::Kind::Naturals) {
                auto out = natural_sum(weight, f, cfg);
                r.value = out.value;
                r.error_estimate = out.error;
                r.evaluations = out.evaluations;
                r.converged = out.converged;
            } else {
                throw IntegrationError("exact summation requires discrete support");
            }
            r.method = IntegrationMethod::ExactSum;
            return r;
        }
        case IntegrationMethod::Quadrature: {
            auto out = quadrature(s, weighted, cfg, density_mode(family, xi));
            r.value = out.value;
            r.error_estimate = out.error;
            r.evaluations = out.evaluations;
            r.converged = out.converged;
            r.method = IntegrationMethod::Quadrature;
            return r;
        }
        case IntegrationMethod::MonteCarlo: {
            std::vector<double> draws = family.sample(xi, cfg.seed, static_cast<int>(cfg.mc_samples));
            double mean = 0.0, m2 = 0.0;
            long n = 0;
            for (double x : draws) {
                double fx = f(x);
                if (std::isnan(fx)) bad_integrand(x);
                ++n;
                double d = fx - mean;
                mean += d / static_cast<double>(n);
                m2 += d * (fx - mean);
            }
            r.value = mean;
            r.error_estimate = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : kInf;
            r.evaluations = n;
            r.method = IntegrationMethod::MonteCarlo;
            return r;
        }
        case IntegrationMethod::Auto:
            break;
    }
    throw std::logic_error("unreachable integration method");
}

}  // namespace statmanifold
