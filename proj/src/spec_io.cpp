#include "statmanifold/spec_io.hpp"

#include <fstream>
#include <limits>

namespace statmanifold {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bound_from_json(const json& v) {
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        throw IoError("bad domain bound \"" + s + "\" (use a number, \"inf\" or \"-inf\")");
    }
    return v.get<double>();
}

ParameterDomain domain_from_json(const json& spec, int expected_dim) {
    ParameterDomain dom;
    if (!spec.contains("domain"))
        throw IoError("custom family spec requires a \"domain\" box");
    for (const auto& pair : spec.at("domain")) {
        if (pair.size() != 2) throw IoError("domain entries must be [lo, hi] pairs");
        dom.box.push_back({bound_from_json(pair[0]), bound_from_json(pair[1])});
    }
    if (expected_dim > 0 && dom.dim() != expected_dim)
        throw IoError("domain box dimension does not match the family dimension");
    return dom;
}

Support support_from_json(const json& s) {
    std::string type = s.at("type").get<std::string>();
    if (type == "interval")
        return Support::interval(bound_from_json(s.at("lower")), bound_from_json(s.at("upper")));
    if (type == "naturals") return Support::naturals();
    if (type == "finite") {
        std::vector<double> pts;
        for (const auto& p : s.at("points")) pts.push_back(p.get<double>());
        return Support::finite(std::move(pts));
    }
    throw IoError("unknown support type \"" + type + "\"");
}

std::function<double(double)> expr_fn(const std::string& source) {
    Expr e = Expr::parse(source, {"x"});
    return [e](double x) { return e.eval_x(x); };
}

void require_schema(const json& spec) {
    if (!spec.contains("schema") || !spec.at("schema").is_number_integer() ||
        spec.at("schema").get<int>() != kSchemaVersion)
        throw IoError("spec requires \"schema\": " + std::to_string(kSchemaVersion));
}

}  // namespace

ParametricFamily family_from_json(const json& spec) {
    require_schema(spec);
    std::string kind = spec.at("kind").get<std::string>();
    if (kind == "gaussian") return families::gaussian();
    if (kind == "gaussian_fixed_sigma")
        return families::gaussian_fixed_sigma(spec.value("sigma", 1.0));
    if (kind == "poisson") return families::poisson_natural();
    if (kind == "bernoulli") return families::bernoulli();
    if (kind == "categorical") return families::categorical(spec.value("k", 3));
    if (kind == "mixture") return families::mixture_uniform_beta();

    if (kind == "exponential_family" || kind == "mixture_family") {
        const auto& stats_json = spec.at("statistics");
        std::vector<std::function<double(double)>> stats;
        for (const auto& s : stats_json) stats.push_back(expr_fn(s.get<std::string>()));
        auto carrier = expr_fn(spec.at("carrier").get<std::string>());
        Support support = support_from_json(spec.at("support"));
        ParameterDomain dom = domain_from_json(spec, static_cast<int>(stats.size()));
        if (kind == "exponential_family") {
            ExponentialFamilySpec efs{carrier, stats, support,
                                      spec.value("name", std::string("exponential_family"))};
            return make_exponential_family(efs, std::move(dom));
        }
        MixtureFamilySpec mfs{carrier, stats, support,
                              spec.value("name", std::string("mixture_family"))};
        return make_mixture_family(mfs, std::move(dom));
    }
    throw IoError("unknown family kind \"" + kind + "\"");
}

ParametricFamily load_family(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open family spec \"" + path + "\"");
    json spec;
    try {
        in >> spec;
    } catch (const json::exception& e) {
        throw IoError("bad JSON in \"" + path + "\": " + e.what());
    }
    return family_from_json(spec);
}

CurvedModelSpec curved_model_from_json(const json& spec) {
    require_schema(spec);
    CurvedModelSpec model;
    model.ambient = family_from_json(spec.at("ambient"));
    model.name = spec.value("name", std::string("curved_model"));

    const auto& emb_json = spec.at("embedding");
    const int n = static_cast<int>(emb_json.size());
    if (n != model.ambient.dim())
        throw IoError("embedding must provide one expression per ambient coordinate");

    std::vector<std::string> uvars = {"u"};
    for (int a = 1; a <= 9; ++a) uvars.push_back("u" + std::to_string(a));
    std::vector<Expr> exprs;
    for (const auto& s : emb_json) exprs.push_back(Expr::parse(s.get<std::string>(), uvars));

    for (const auto& pair : spec.at("u_domain")) {
        if (pair.size() != 2) throw IoError("u_domain entries must be [lo, hi] pairs");
        model.u_domain.push_back({bound_from_json(pair[0]), bound_from_json(pair[1])});
    }
    model.model_dim = spec.value("model_dim", static_cast<int>(model.u_domain.size()));
    if (model.model_dim != static_cast<int>(model.u_domain.size()))
        throw IoError("model_dim does not match u_domain");
    if (model.model_dim >= n)
        throw IoError("curved model must have model_dim < ambient dim");

    int m = model.model_dim;
    model.embedding = [exprs, m, n](const VectorXd& u) {
        std::map<std::string, double> vars;
        vars["u"] = u[0];
        for (int a = 0; a < m; ++a) vars["u" + std::to_string(a + 1)] = u[a];
        VectorXd xi(n);
        for (int k = 0; k < n; ++k) xi[k] = exprs[static_cast<std::size_t>(k)].eval(vars);
        return xi;
    };
    return model;
}

CurvedModelSpec load_curved_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model spec \"" + path + "\"");
    json spec;
    try {
        in >> spec;
    } catch (const json::exception& e) {
        throw IoError("bad JSON in \"" + path + "\": " + e.what());
    }
    return curved_model_from_json(spec);
}

json to_json(const VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json to_json(const MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(row);
    }
    return out;
}

json to_json(const Tensor3& t) {
    json out = json::array();
    for (int i = 0; i < t.extent1(); ++i) {
        json plane = json::array();
        for (int j = 0; j < t.extent2(); ++j) {
            json row = json::array();
            for (int k = 0; k < t.extent3(); ++k) row.push_back(t(i, j, k));
            plane.push_back(row);
        }
        out.push_back(plane);
    }
    return out;
}

json report_header(const std::string& command, json resolved_config) {
    json h;
    h["schema"] = kSchemaVersion;
    h["engine"] = kEngineVersion;
    h["command"] = command;
    h["config"] = std::move(resolved_config);
    return h;
}

}  // namespace statmanifold
