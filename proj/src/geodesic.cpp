#include "statmanifold/geodesic.hpp"

#include <cmath>
#include <map>
#include <memory>

namespace statmanifold {

namespace {

class ChristoffelField {
public:
    ChristoffelField(const ParametricFamily& family, double alpha, const GeodesicConfig& cfg)
        : family_(family), alpha_(alpha), cfg_(cfg) {}

    Tensor3 at(const VectorXd& xi) const {
        if (cfg_.mode == ChristoffelMode::Exact) return exact(xi);
        return interpolated(xi);
    }

private:
    Tensor3 exact(const VectorXd& xi) const {
        auto b = metric_connection_bundle(family_, xi, alpha_, cfg_.integration);
        return christoffel_second_kind(b.connection, b.metric);
    }

    // multilinear interpolation over the 2^n corners of the lattice cell
    Tensor3 interpolated(const VectorXd& xi) const {
        const int n = family_.dim();
        const double h = cfg_.lattice_spacing;
        std::vector<long> base(n);
        VectorXd frac(n);
        for (int i = 0; i < n; ++i) {
            double u = xi[i] / h;
            base[i] = static_cast<long>(std::floor(u));
            frac[i] = u - std::floor(u);
        }
        Tensor3 out(n, n, n);
        std::vector<double> acc(out.data().size(), 0.0);
        for (long corner = 0; corner < (1L << n); ++corner) {
            std::vector<long> node = base;
            double w = 1.0;
            for (int i = 0; i < n; ++i) {
                if ((corner >> i) & 1) {
                    node[i] += 1;
                    w *= frac[i];
                } else {
                    w *= 1.0 - frac[i];
                }
            }
            const Tensor3& gn = node_value(node);
            for (std::size_t idx = 0; idx < acc.size(); ++idx)
                acc[idx] += w * gn.data()[idx];
        }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    out(a, b, c) = acc[(static_cast<std::size_t>(a) * n + b) * n + c];
        return out;
    }

    const Tensor3& node_value(const std::vector<long>& node) const {
        auto it = cache_.find(node);
        if (it != cache_.end()) return it->second;
        VectorXd xi(family_.dim());
        for (int i = 0; i < family_.dim(); ++i)
            xi[i] = static_cast<double>(node[i]) * cfg_.lattice_spacing;
        auto [pos, _] = cache_.emplace(node, exact(xi));
        return pos->second;
    }

    const ParametricFamily& family_;
    double alpha_;
    const GeodesicConfig& cfg_;
    mutable std::map<std::vector<long>, Tensor3> cache_;
};

VectorXd acceleration(const Tensor3& gamma, const VectorXd& v) {
    const int n = static_cast<int>(v.size());
    VectorXd a = VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += gamma(k, i, j) * v[i] * v[j];
        a[k] = -s;
    }
    return a;
}

}  // namespace

std::string to_string(GeodesicStatus s) {
    switch (s) {
        case GeodesicStatus::Completed: return "completed";
        case GeodesicStatus::HitBoundary: return "hit_boundary";
        case GeodesicStatus::StepFailure: return "step_failure";
    }
    return "?";
}

GeodesicPath integrate_geodesic(const ParametricFamily& family, const VectorXd& xi0,
                                const VectorXd& v0, double alpha, double t_end,
                                const GeodesicConfig& cfg) {
    family.require_in_domain(xi0);
    if (v0.size() != family.dim())
        throw DimensionError("integrate_geodesic: velocity dimension mismatch");
    double dt = cfg.dt > 0.0 ? cfg.dt : t_end / 1000.0;
    if (!(dt > 0.0)) throw DomainError("integrate_geodesic: dt must be positive");

    ChristoffelField field(family, alpha, cfg);

    GeodesicPath path;
    path.alpha = alpha;
    path.samples.push_back({0.0, xi0, v0});

    VectorXd xi = xi0, v = v0;
    double t = 0.0;
    const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    for (long s = 0; s < steps; ++s) {
        double h = std::min(dt, t_end - t);
        bool ok = true;
        auto eval = [&](const VectorXd& q, const VectorXd& p, VectorXd& dq, VectorXd& dp) {
            if (!family.domain().contains(q)) {
                ok = false;
                dq = p;
                dp = VectorXd::Zero(p.size());
                return;
            }
            dq = p;
            dp = acceleration(field.at(q), p);
        };
        VectorXd k1q, k1v, k2q, k2v, k3q, k3v, k4q, k4v;
        eval(xi, v, k1q, k1v);
        eval(xi + 0.5 * h * k1q, v + 0.5 * h * k1v, k2q, k2v);
        eval(xi + 0.5 * h * k2q, v + 0.5 * h * k2v, k3q, k3v);
        eval(xi + h * k3q, v + h * k3v, k4q, k4v);
        if (!ok) {
            path.status = GeodesicStatus::HitBoundary;
            return path;
        }
        VectorXd xin = xi + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        VectorXd vn = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!xin.allFinite() || !vn.allFinite()) {
            path.status = GeodesicStatus::StepFailure;
            return path;
        }
        if (!family.domain().contains(xin)) {
            path.status = GeodesicStatus::HitBoundary;
            return path;
        }
        xi = xin;
        v = vn;
        t += h;
        path.samples.push_back({t, xi, v});
    }
    path.status = GeodesicStatus::Completed;
    return path;
}

VectorXd exponential_map(const ParametricFamily& family, const VectorXd& xi0,
                         const VectorXd& v0, double alpha, const GeodesicConfig& cfg) {
    if (v0.cwiseAbs().maxCoeff() == 0.0) {
        family.require_in_domain(xi0);
        return xi0;
    }
    GeodesicPath path = integrate_geodesic(family, xi0, v0, alpha, 1.0, cfg);
    if (path.status == GeodesicStatus::HitBoundary)
        throw BoundaryError(family.name() + ": geodesic left the domain before t = 1",
                            path.samples.back().t);
    if (path.status == GeodesicStatus::StepFailure)
        throw IntegrationError(family.name() + ": geodesic step failure");
    return path.endpoint().xi;
}

}  // namespace statmanifold
