#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace statmanifold {

// Minimal arithmetic expression language used by JSON family specs:
// +, -, *, /, pow(a,b), exp(a), log(a), numeric literals and named
// variables ("x" for sample points, "u"/"u1".."u9" for embeddings).
class Expr {
public:
    // Throws ConstructionError on a parse failure.
    static Expr parse(const std::string& source,
                      const std::vector<std::string>& allowed_vars = {"x"});

    double eval(const std::map<std::string, double>& vars) const;
    double eval_x(double x) const;  // convenience for single-variable exprs

    const std::string& source() const { return source_; }

    struct Node;  // parse-tree node, public for the out-of-line parser

private:
    std::shared_ptr<const Node> root_;
    std::string source_;
};

}  // namespace statmanifold
