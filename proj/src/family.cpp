#include "statmanifold/family.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "statmanifold/integrate.hpp"
#include "statmanifold/rng.hpp"

namespace statmanifold {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

double frac(double v) { return v - std::floor(v); }
}  // namespace

// ---- Support -------------------------------------------------------------

bool Support::contains(double x) const {
    switch (kind) {
        case Kind::Interval: return x >= lower && x <= upper;
        case Kind::Naturals: return x >= 0.0 && x == std::floor(x);
        case Kind::FiniteSet:
            for (double p : points)
                if (p == x) return true;
            return false;
    }
    return false;
}

std::vector<double> Support::probe_grid(int count) const {
    std::vector<double> g;
    switch (kind) {
        case Kind::FiniteSet:
            return points;
        case Kind::Naturals:
            g.reserve(count);
            for (int k = 0; k < count; ++k) g.push_back(static_cast<double>(k));
            return g;
        case Kind::Interval: {
            g.reserve(count);
            bool lo_inf = std::isinf(lower), hi_inf = std::isinf(upper);
            for (int k = 0; k < count; ++k) {
                double u = frac(0.5 + kGolden * static_cast<double>(k + 1));
                double x;
                if (!lo_inf && !hi_inf) {
                    x = lower + u * (upper - lower);
                } else if (lo_inf && hi_inf) {
                    x = std::tan(M_PI * (u - 0.5));
                } else if (!lo_inf) {
                    x = lower + u / (1.0 - u);
                } else {
                    x = upper - u / (1.0 - u);
                }
                g.push_back(x);
            }
            return g;
        }
    }
    return g;
}

// ---- ParameterDomain -------------------------------------------------------

bool ParameterDomain::contains(const VectorXd& xi) const {
    if (xi.size() != static_cast<Eigen::Index>(box.size())) return false;
    for (int i = 0; i < dim(); ++i) {
        double lo = box[i][0], hi = box[i][1];
        if (!std::isinf(lo) && xi[i] < lo + margin) return false;
        if (!std::isinf(hi) && xi[i] > hi - margin) return false;
        if (std::isinf(lo) && xi[i] <= lo) return false;
        if (std::isinf(hi) && xi[i] >= hi) return false;
        if (!std::isfinite(xi[i])) return false;
    }
    if (predicate && !predicate(xi)) return false;
    return true;
}

double ParameterDomain::slack(const VectorXd& xi, int axis) const {
    double lo = box[axis][0], hi = box[axis][1];
    double s = kInf;
    if (!std::isinf(lo)) s = std::min(s, xi[axis] - (lo + margin));
    if (!std::isinf(hi)) s = std::min(s, (hi - margin) - xi[axis]);
    return s;
}

VectorXd ParameterDomain::center() const {
    VectorXd c(dim());
    for (int i = 0; i < dim(); ++i) {
        double lo = box[i][0], hi = box[i][1];
        if (std::isinf(lo) && std::isinf(hi)) c[i] = 0.0;
        else if (std::isinf(hi)) c[i] = lo + 1.0;
        else if (std::isinf(lo)) c[i] = hi - 1.0;
        else c[i] = 0.5 * (lo + hi);
    }
    return c;
}

// ---- ParametricFamily ------------------------------------------------------

ParametricFamily::ParametricFamily(std::string name, int dim, ParameterDomain domain,
                                   Support support, LogDensityFn log_density, ScoreFn score,
                                   SamplerFn sampler)
    : name_(std::move(name)),
      dim_(dim),
      domain_(std::move(domain)),
      support_(std::move(support)),
      log_density_(std::move(log_density)),
      score_(std::move(score)),
      sampler_(std::move(sampler)) {}

void ParametricFamily::require_in_domain(const VectorXd& xi) const {
    if (!domain_.contains(xi))
        throw DomainError(name_ + ": parameter outside the open domain box");
}

double ParametricFamily::log_density(double x, const VectorXd& xi) const {
    require_in_domain(xi);
    if (!support_.contains(x))
        throw SupportError(name_ + ": sample point " + std::to_string(x) +
                           " outside the declared support");
    return log_density_(x, xi);
}

double fd_step(double coordinate) {
    static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
    return h0 * std::max(1.0, std::abs(coordinate));
}

VectorXd ParametricFamily::score_finite_difference(double x, const VectorXd& xi) const {
    require_in_domain(xi);
    VectorXd s(dim_);
    for (int i = 0; i < dim_; ++i) {
        double h = fd_step(xi[i]);
        double sl = domain_.slack(xi, i);
        if (sl < 2.0 * h) h = 0.5 * sl;
        VectorXd p = xi, m = xi;
        p[i] += h;
        m[i] -= h;
        s[i] = (log_density_(x, p) - log_density_(x, m)) / (2.0 * h);
    }
    return s;
}

VectorXd ParametricFamily::score(double x, const VectorXd& xi) const {
    require_in_domain(xi);
    if (!support_.contains(x))
        throw SupportError(name_ + ": sample point outside the declared support");
    if (score_) return score_(x, xi);
    return score_finite_difference(x, xi);
}

MatrixXd ParametricFamily::log_density_hessian(double x, const VectorXd& xi) const {
    require_in_domain(xi);
    MatrixXd h(dim_, dim_);
    auto sc = [&](const VectorXd& at) {
        return score_ ? score_(x, at) : score_finite_difference(x, at);
    };
    for (int j = 0; j < dim_; ++j) {
        double step = fd_step(xi[j]);
        double sl = domain_.slack(xi, j);
        if (sl < 2.0 * step) step = 0.5 * sl;
        VectorXd p = xi, m = xi;
        p[j] += step;
        m[j] -= step;
        h.col(j) = (sc(p) - sc(m)) / (2.0 * step);
    }
    return 0.5 * (h + h.transpose());
}

std::vector<double> ParametricFamily::sample(const VectorXd& xi, std::uint64_t seed,
                                             int count) const {
    require_in_domain(xi);
    std::vector<double> out;
    out.reserve(count);
    sampler_(xi, seed, count, out);
    return out;
}

// ---- built-ins -------------------------------------------------------------

namespace families {

ParametricFamily gaussian() {
    ParameterDomain dom;
    dom.box = {{-kInf, kInf}, {0.0, kInf}};
    auto logp = [](double x, const VectorXd& xi) {
        double mu = xi[0], sigma = xi[1];
        double z = (x - mu) / sigma;
        return -std::log(sigma) - 0.5 * std::log(2.0 * M_PI) - 0.5 * z * z;
    };
    auto score = [](double x, const VectorXd& xi) {
        double mu = xi[0], sigma = xi[1];
        VectorXd s(2);
        s[0] = (x - mu) / (sigma * sigma);
        s[1] = -1.0 / sigma + (x - mu) * (x - mu) / (sigma * sigma * sigma);
        return s;
    };
    auto sampler = [](const VectorXd& xi, std::uint64_t seed, int count,
                      std::vector<double>& out) {
        Rng rng(seed);
        for (int i = 0; i < count; ++i) out.push_back(xi[0] + xi[1] * rng.normal());
    };
    return {"gaussian", 2, dom, Support::real_line(), logp, score, sampler};
}

ParametricFamily gaussian_fixed_sigma(double sigma) {
    ParameterDomain dom;
    dom.box = {{-kInf, kInf}};
    auto logp = [sigma](double x, const VectorXd& xi) {
        double z = (x - xi[0]) / sigma;
        return -std::log(sigma) - 0.5 * std::log(2.0 * M_PI) - 0.5 * z * z;
    };
    auto score = [sigma](double x, const VectorXd& xi) {
        VectorXd s(1);
        s[0] = (x - xi[0]) / (sigma * sigma);
        return s;
    };
    auto sampler = [sigma](const VectorXd& xi, std::uint64_t seed, int count,
                           std::vector<double>& out) {
        Rng rng(seed);
        for (int i = 0; i < count; ++i) out.push_back(xi[0] + sigma * rng.normal());
    };
    return {"gaussian_fixed_sigma", 1, dom, Support::real_line(), logp, score, sampler};
}

ParametricFamily poisson_natural() {
    ParameterDomain dom;
    dom.box = {{-25.0, 10.0}};
    auto logp = [](double x, const VectorXd& xi) {
        double theta = xi[0];
        return x * theta - std::exp(theta) - std::lgamma(x + 1.0);
    };
    auto score = [](double x, const VectorXd& xi) {
        VectorXd s(1);
        s[0] = x - std::exp(xi[0]);
        return s;
    };
    auto sampler = [](const VectorXd& xi, std::uint64_t seed, int count,
                      std::vector<double>& out) {
        double lambda = std::exp(xi[0]);
        Rng rng(seed);
        double p0 = std::exp(-lambda);
        for (int i = 0; i < count; ++i) {
            double u = rng.uniform();
            double p = p0, cum = p0;
            long k = 0;
            while (u > cum && k < 100000) {
                ++k;
                p *= lambda / static_cast<double>(k);
                cum += p;
            }
            out.push_back(static_cast<double>(k));
        }
    };
    return {"poisson_natural", 1, dom, Support::naturals(), logp, score, sampler};
}

ParametricFamily bernoulli() {
    ParameterDomain dom;
    dom.box = {{0.0, 1.0}};
    auto logp = [](double x, const VectorXd& xi) {
        double p = xi[0];
        return x > 0.5 ? std::log(p) : std::log1p(-p);
    };
    auto score = [](double x, const VectorXd& xi) {
        double p = xi[0];
        VectorXd s(1);
        s[0] = x > 0.5 ? 1.0 / p : -1.0 / (1.0 - p);
        return s;
    };
    auto sampler = [](const VectorXd& xi, std::uint64_t seed, int count,
                      std::vector<double>& out) {
        Rng rng(seed);
        for (int i = 0; i < count; ++i) out.push_back(rng.uniform() < xi[0] ? 1.0 : 0.0);
    };
    return {"bernoulli", 1, dom, Support::finite({0.0, 1.0}), logp, score, sampler};
}

ParametricFamily categorical(int k) {
    if (k < 2) throw ConstructionError("categorical: k must be >= 2");
    ParameterDomain dom;
    dom.box.assign(k - 1, {0.0, 1.0});
    dom.predicate = [margin = dom.margin](const VectorXd& xi) {
        return xi.sum() < 1.0 - margin;
    };
    auto prob = [k](double x, const VectorXd& xi) {
        int c = static_cast<int>(x);
        if (c == k - 1) return 1.0 - xi.sum();
        return xi[c];
    };
    auto logp = [prob](double x, const VectorXd& xi) { return std::log(prob(x, xi)); };
    auto score = [k](double x, const VectorXd& xi) {
        int c = static_cast<int>(x);
        VectorXd s = VectorXd::Zero(k - 1);
        if (c == k - 1) {
            s.setConstant(-1.0 / (1.0 - xi.sum()));
        } else {
            s[c] = 1.0 / xi[c];
        }
        return s;
    };
    auto sampler = [k](const VectorXd& xi, std::uint64_t seed, int count,
                       std::vector<double>& out) {
        Rng rng(seed);
        for (int i = 0; i < count; ++i) {
            double u = rng.uniform();
            double cum = 0.0;
            int c = k - 1;
            for (int j = 0; j < k - 1; ++j) {
                cum += xi[j];
                if (u < cum) {
                    c = j;
                    break;
                }
            }
            out.push_back(static_cast<double>(c));
        }
    };
    std::vector<double> pts;
    for (int c = 0; c < k; ++c) pts.push_back(static_cast<double>(c));
    return {"categorical", k - 1, dom, Support::finite(pts), logp, score, sampler};
}

ParametricFamily mixture_uniform_beta() {
    // p(x; xi) = 1 + xi * (2x - 1) on [0,1]; the carrier is the uniform
    // density and F1 = Beta(2,1) density minus it.
    ParameterDomain dom;
    dom.box = {{0.0, 1.0}};
    auto dens = [](double x, const VectorXd& xi) { return 1.0 + xi[0] * (2.0 * x - 1.0); };
    auto logp = [dens](double x, const VectorXd& xi) {
        double p = dens(x, xi);
        return p > 0.0 ? std::log(p) : -kInf;
    };
    auto score = [dens](double x, const VectorXd& xi) {
        VectorXd s(1);
        s[0] = (2.0 * x - 1.0) / dens(x, xi);
        return s;
    };
    auto sampler = [](const VectorXd& xi, std::uint64_t seed, int count,
                      std::vector<double>& out) {
        Rng rng(seed);
        double t = xi[0];
        for (int i = 0; i < count; ++i) {
            double u = rng.uniform();
            // CDF(x) = x + t x (x - 1); invert the quadratic
            double x = std::abs(t) < 1e-12
                           ? u
                           : ((t - 1.0) + std::sqrt((1.0 - t) * (1.0 - t) + 4.0 * t * u)) /
                                 (2.0 * t);
            out.push_back(x);
        }
    };
    return {"mixture_uniform_beta", 1, dom, Support::interval(0.0, 1.0), logp, score, sampler};
}

}  // namespace families

// ---- generic inversion sampler ----------------------------------------------

namespace {

// Numeric inverse-CDF sampler for constructed families. Builds a CDF
// table per parameter value on first use; accuracy is adequate for the
// Monte Carlo paths, which carry their own error bars.
class InversionSampler {
public:
    InversionSampler(ParametricFamily::LogDensityFn logp, Support support)
        : logp_(std::move(logp)), support_(support) {}

    void operator()(const VectorXd& xi, std::uint64_t seed, int count,
                    std::vector<double>& out) const {
        Rng rng(seed);
        if (support_.kind == Support::Kind::FiniteSet) {
            std::vector<double> w;
            double total = 0.0;
            for (double x : support_.points) {
                double p = std::exp(logp_(x, xi));
                w.push_back(p);
                total += p;
            }
            for (int i = 0; i < count; ++i) {
                double u = rng.uniform() * total, cum = 0.0;
                double pick = support_.points.back();
                for (std::size_t j = 0; j < w.size(); ++j) {
                    cum += w[j];
                    if (u < cum) {
                        pick = support_.points[j];
                        break;
                    }
                }
                out.push_back(pick);
            }
            return;
        }
        if (support_.kind == Support::Kind::Naturals) {
            for (int i = 0; i < count; ++i) {
                double u = rng.uniform();
                double cum = 0.0;
                long x = 0;
                for (; x < 100000; ++x) {
                    cum += std::exp(logp_(static_cast<double>(x), xi));
                    if (u < cum) break;
                }
                out.push_back(static_cast<double>(x));
            }
            return;
        }
        const Table& tab = table_for(xi);
        for (int i = 0; i < count; ++i) {
            double u = rng.uniform();
            out.push_back(tab.invert(u));
        }
    }

private:
    struct Table {
        std::vector<double> x, cdf;
        double invert(double u) const {
            auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
            if (it == cdf.begin()) return x.front();
            if (it == cdf.end()) return x.back();
            std::size_t j = static_cast<std::size_t>(it - cdf.begin());
            double c0 = cdf[j - 1], c1 = cdf[j];
            double t = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
            return x[j - 1] + t * (x[j] - x[j - 1]);
        }
    };

    const Table& table_for(const VectorXd& xi) const {
        std::vector<double> key(xi.data(), xi.data() + xi.size());
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Table tab;
        const int m = 4096;
        bool lo_inf = std::isinf(support_.lower), hi_inf = std::isinf(support_.upper);
        tab.x.reserve(m + 1);
        for (int j = 0; j <= m; ++j) {
            double t = (static_cast<double>(j) + 0.5) / (m + 1);
            double x;
            if (!lo_inf && !hi_inf) x = support_.lower + t * (support_.upper - support_.lower);
            else if (lo_inf && hi_inf) x = std::tan(M_PI * (t - 0.5));
            else if (!lo_inf) x = support_.lower + t / (1.0 - t) * 2.0;
            else x = support_.upper - t / (1.0 - t) * 2.0;
            tab.x.push_back(x);
        }
        std::sort(tab.x.begin(), tab.x.end());
        tab.cdf.resize(tab.x.size(), 0.0);
        double cum = 0.0;
        for (std::size_t j = 1; j < tab.x.size(); ++j) {
            double xm = 0.5 * (tab.x[j - 1] + tab.x[j]);
            cum += std::exp(logp_(xm, xi)) * (tab.x[j] - tab.x[j - 1]);
            tab.cdf[j] = cum;
        }
        if (cum > 0.0)
            for (double& c : tab.cdf) c /= cum;
        auto [pos, _] = cache_.emplace(std::move(key), std::move(tab));
        return pos->second;
    }

    ParametricFamily::LogDensityFn logp_;
    Support support_;
    mutable std::mutex mutex_;
    mutable std::map<std::vector<double>, Table> cache_;
};

// Gram-matrix rank check on [1, F_1..F_n] over the probe grid; catches
// both dependent statistics and identically-constant ones.
void check_linear_independence(const std::vector<std::function<double(double)>>& stats,
                               const Support& support, const std::string& name) {
    std::vector<double> grid = support.probe_grid(256);
    const int n = static_cast<int>(stats.size());
    MatrixXd gram = MatrixXd::Zero(n + 1, n + 1);
    for (double x : grid) {
        VectorXd v(n + 1);
        v[0] = 1.0;
        for (int i = 0; i < n; ++i) {
            double f = stats[i](x);
            // damp unbounded statistics so the Gram matrix stays finite
            v[i + 1] = std::isfinite(f) ? std::tanh(f / 64.0) * 64.0 : 0.0;
        }
        gram += v * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo < 1e-10 * hi)
        throw ConstructionError(name +
                                ": statistics F_i (with the constant) are linearly dependent "
                                "on the sample grid");
}

}  // namespace

// ---- exponential family ------------------------------------------------------

ParametricFamily make_exponential_family(const ExponentialFamilySpec& spec,
                                         ParameterDomain domain) {
    if (spec.statistics.empty())
        throw ConstructionError("exponential family: no statistics supplied");
    if (static_cast<int>(spec.statistics.size()) != domain.dim())
        throw ConstructionError("exponential family: dim mismatch between statistics and domain");
    check_linear_independence(spec.statistics, spec.support, spec.name);

    const int n = domain.dim();
    struct PsiCache {
        std::mutex mutex;
        std::map<std::vector<double>, std::pair<double, VectorXd>> values;
    };
    auto cache = std::make_shared<PsiCache>();
    auto carrier = spec.carrier;
    auto stats = spec.statistics;
    Support support = spec.support;
    std::string name = spec.name;

    // exponent before normalization
    auto eta = [carrier, stats](double x, const VectorXd& xi) {
        double e = carrier(x);
        for (std::size_t i = 0; i < stats.size(); ++i) e += xi[static_cast<int>(i)] * stats[i](x);
        return e;
    };

    auto psi_and_grad = [cache, eta, stats, support, name, n](const VectorXd& xi)
        -> std::pair<double, VectorXd> {
        std::vector<double> key(xi.data(), xi.data() + xi.size());
        {
            std::lock_guard<std::mutex> lock(cache->mutex);
            auto it = cache->values.find(key);
            if (it != cache->values.end()) return it->second;
        }
        // shift by the grid maximum of the exponent for stability
        double shift = -kInf;
        for (double x : support.probe_grid(64)) {
            double e = eta(x, xi);
            if (std::isfinite(e)) shift = std::max(shift, e);
        }
        if (!std::isfinite(shift)) shift = 0.0;
        IntegrationConfig cfg;
        cfg.rel_tol = 1e-12;
        auto z = integrate_raw(support, [&](double x) { return std::exp(eta(x, xi) - shift); }, cfg);
        if (!(z.value > 0.0) || !std::isfinite(z.value) || !z.converged)
            throw ConstructionError(name + ": normalization integral diverges at this parameter");
        double psi = shift + std::log(z.value);
        VectorXd grad(n);
        for (int i = 0; i < n; ++i) {
            auto gi = integrate_raw(
                support, [&](double x) { return stats[static_cast<std::size_t>(i)](x) *
                                                 std::exp(eta(x, xi) - psi); }, cfg);
            grad[i] = gi.value;
        }
        std::lock_guard<std::mutex> lock(cache->mutex);
        auto [it, _] = cache->values.emplace(std::move(key), std::make_pair(psi, grad));
        return it->second;
    };

    auto logp = [eta, psi_and_grad](double x, const VectorXd& xi) {
        return eta(x, xi) - psi_and_grad(xi).first;
    };
    auto score = [stats, psi_and_grad, n](double x, const VectorXd& xi) {
        VectorXd s(n);
        const VectorXd& g = psi_and_grad(xi).second;
        for (int i = 0; i < n; ++i) s[i] = stats[static_cast<std::size_t>(i)](x) - g[i];
        return s;
    };

    // probe the normalizer once so divergent specs fail at construction
    psi_and_grad(domain.center());

    auto sampler = std::make_shared<InversionSampler>(logp, support);
    auto sampler_fn = [sampler](const VectorXd& xi, std::uint64_t seed, int count,
                                std::vector<double>& out) { (*sampler)(xi, seed, count, out); };
    return {name, n, std::move(domain), support, logp, score, sampler_fn};
}

// ---- mixture family -----------------------------------------------------------

ParametricFamily make_mixture_family(const MixtureFamilySpec& spec, ParameterDomain domain) {
    if (spec.statistics.empty())
        throw ConstructionError("mixture family: no statistics supplied");
    if (static_cast<int>(spec.statistics.size()) != domain.dim())
        throw ConstructionError("mixture family: dim mismatch between statistics and domain");

    const int n = domain.dim();
    auto carrier = spec.carrier;
    auto stats = spec.statistics;
    Support support = spec.support;
    std::string name = spec.name;

    auto dens = [carrier, stats](double x, const VectorXd& xi) {
        double p = carrier(x);
        for (std::size_t i = 0; i < stats.size(); ++i) p += xi[static_cast<int>(i)] * stats[i](x);
        return p;
    };

    // normalization: carrier integrates to 1, each F_i to 0
    IntegrationConfig cfg;
    cfg.rel_tol = 1e-12;
    auto zc = integrate_raw(support, carrier, cfg);
    if (std::abs(zc.value - 1.0) > 1e-8)
        throw ConstructionError(name + ": carrier K does not integrate to 1 (got " +
                                std::to_string(zc.value) + ")");
    for (int i = 0; i < n; ++i) {
        auto zi = integrate_raw(support, stats[static_cast<std::size_t>(i)], cfg);
        if (std::abs(zi.value) > 1e-8)
            throw ConstructionError(name + ": statistic F_" + std::to_string(i + 1) +
                                    " has nonzero mass " + std::to_string(zi.value));
    }

    // positivity grid check over domain corners, center and a quasi-random
    // sample of parameter points
    std::vector<VectorXd> xis;
    xis.push_back(domain.center());
    long corners = 1L << n;
    if (n <= 10) {
        for (long mask = 0; mask < corners; ++mask) {
            VectorXd c(n);
            bool ok = true;
            for (int i = 0; i < n; ++i) {
                double lo = domain.box[i][0], hi = domain.box[i][1];
                double v = (mask >> i) & 1 ? hi - 2.0 * domain.margin : lo + 2.0 * domain.margin;
                if (!std::isfinite(v)) ok = false;
                c[i] = v;
            }
            if (ok && domain.contains(c)) xis.push_back(c);
        }
    }
    for (int k = 0; k < 16; ++k) {
        VectorXd c(n);
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            double lo = domain.box[i][0], hi = domain.box[i][1];
            if (std::isinf(lo) || std::isinf(hi)) { ok = false; break; }
            double u = frac(0.5 + kGolden * static_cast<double>(k * n + i + 1));
            c[i] = lo + u * (hi - lo);
        }
        if (ok && domain.contains(c)) xis.push_back(c);
    }
    std::vector<double> grid = support.probe_grid(256);
    for (const VectorXd& xi : xis) {
        for (double x : grid) {
            double p = dens(x, xi);
            if (p < -1e-12)
                throw ConstructionError(name + ": density negative (p = " + std::to_string(p) +
                                        ") at x = " + std::to_string(x) + ", xi = (" +
                                        [&] {
                                            std::string s;
                                            for (int i = 0; i < n; ++i)
                                                s += (i ? "," : "") + std::to_string(xi[i]);
                                            return s;
                                        }() + ")");
        }
    }

    auto logp = [dens](double x, const VectorXd& xi) {
        double p = dens(x, xi);
        return p > 0.0 ? std::log(p) : -kInf;
    };
    auto score = [dens, stats, n](double x, const VectorXd& xi) {
        double p = dens(x, xi);
        VectorXd s(n);
        for (int i = 0; i < n; ++i) s[i] = stats[static_cast<std::size_t>(i)](x) / p;
        return s;
    };
    auto sampler = std::make_shared<InversionSampler>(logp, support);
    auto sampler_fn = [sampler](const VectorXd& xi, std::uint64_t seed, int count,
                                std::vector<double>& out) { (*sampler)(xi, seed, count, out); };
    return {name, n, std::move(domain), support, logp, score, sampler_fn};
}

// ---- diagnostics ----------------------------------------------------------------

FamilyDiagnostics validate_family(const ParametricFamily& family, const VectorXd& xi) {
    return validate_family(family, xi, family.domain().center());
}

FamilyDiagnostics validate_family(const ParametricFamily& family, const VectorXd& xi,
                                  const VectorXd& reference_xi) {
    family.require_in_domain(xi);
    FamilyDiagnostics d;
    IntegrationConfig cfg;

    auto norm = expect(family, xi, [](double) { return 1.0; }, cfg);
    d.normalization_residual = std::abs(norm.value - 1.0);

    d.score_mean = VectorXd::Zero(family.dim());
    for (int i = 0; i < family.dim(); ++i) {
        auto r = expect(family, xi, [&](double x) { return family.score(x, xi)[i]; }, cfg);
        d.score_mean[i] = r.value;
    }
    d.score_mean_max_abs = d.score_mean.cwiseAbs().maxCoeff();

    // support invariance vs the reference parameter on the fixed grid
    if (family.domain().contains(reference_xi)) {
        for (double x : family.support().probe_grid(256)) {
            bool a = std::isfinite(family.log_density(x, xi));
            bool b = std::isfinite(family.log_density(x, reference_xi));
            if (a != b) {
                d.support_invariant = false;
                d.support_mismatch_x = x;
                break;
            }
        }
    }

    if (family.has_analytic_score()) {
        double worst = 0.0;
        auto grid = family.support().probe_grid(32);
        for (double x : grid) {
            if (!std::isfinite(family.log_density(x, xi))) continue;
            VectorXd a = family.score(x, xi);
            VectorXd b = family.score_finite_difference(x, xi);
            worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
        }
        d.score_fd_max_deviation = worst;
    }
    return d;
}

}  // namespace statmanifold
