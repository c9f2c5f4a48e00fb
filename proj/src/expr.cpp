#include "statmanifold/expr.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "statmanifold/errors.hpp"

namespace statmanifold {

struct Expr::Node {
    enum class Kind { Constant, Variable, Add, Sub, Mul, Div, Pow, Exp, Log, Neg };
    Kind kind;
    double value = 0.0;
    std::string name;
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Expr::Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

class Parser {
public:
    Parser(const std::string& s, const std::vector<std::string>& vars)
        : s_(s), vars_(vars) {}

    NodePtr parse() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != s_.size())
            fail("unexpected trailing input at position " + std::to_string(pos_));
        return e;
    }

private:
    const std::string& s_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) {
        throw ConstructionError("expression parse error in \"" + s_ + "\": " + why);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr e = term();
        for (;;) {
            if (accept('+')) {
                e = make(Expr::Node::Kind::Add, e, term());
            } else if (accept('-')) {
                e = make(Expr::Node::Kind::Sub, e, term());
            } else {
                return e;
            }
        }
    }

    NodePtr term() {
        NodePtr e = unary();
        for (;;) {
            if (accept('*')) {
                e = make(Expr::Node::Kind::Mul, e, unary());
            } else if (accept('/')) {
                e = make(Expr::Node::Kind::Div, e, unary());
            } else {
                return e;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Expr::Node::Kind::Neg, unary());
        if (accept('+')) return unary();
        return primary();
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (accept('(')) {
            NodePtr e = expression();
            if (!accept(')')) fail("missing ')'");
            return e;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        std::size_t end = 0;
        double v;
        try {
            v = std::stod(s_.substr(pos_), &end);
        } catch (const std::exception&) {
            fail("bad numeric literal");
        }
        pos_ += end;
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Node::Kind::Constant;
        n->value = v;
        return n;
    }

    NodePtr identifier() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string name = s_.substr(start, pos_ - start);
        if (name == "pow") {
            if (!accept('(')) fail("pow expects '('");
            NodePtr a = expression();
            if (!accept(',')) fail("pow expects two arguments");
            NodePtr b = expression();
            if (!accept(')')) fail("missing ')'");
            return make(Expr::Node::Kind::Pow, a, b);
        }
        if (name == "exp" || name == "log") {
            if (!accept('(')) fail(name + " expects '('");
            NodePtr a = expression();
            if (!accept(')')) fail("missing ')'");
            return make(name == "exp" ? Expr::Node::Kind::Exp : Expr::Node::Kind::Log, a);
        }
        if (name == "pi") {
            auto n = std::make_shared<Expr::Node>();
            n->kind = Expr::Node::Kind::Constant;
            n->value = M_PI;
            return n;
        }
        for (const auto& v : vars_) {
            if (name == v) {
                auto n = std::make_shared<Expr::Node>();
                n->kind = Expr::Node::Kind::Variable;
                n->name = name;
                return n;
            }
        }
        fail("unknown identifier \"" + name + "\"");
    }
};

double eval_node(const Expr::Node& n, const std::map<std::string, double>& vars) {
    using K = Expr::Node::Kind;
    switch (n.kind) {
        case K::Constant: return n.value;
        case K::Variable: {
            auto it = vars.find(n.name);
            if (it == vars.end())
                throw DimensionError("expression variable \"" + n.name + "\" not bound");
            return it->second;
        }
        case K::Add: return eval_node(*n.lhs, vars) + eval_node(*n.rhs, vars);
        case K::Sub: return eval_node(*n.lhs, vars) - eval_node(*n.rhs, vars);
        case K::Mul: return eval_node(*n.lhs, vars) * eval_node(*n.rhs, vars);
        case K::Div: return eval_node(*n.lhs, vars) / eval_node(*n.rhs, vars);
        case K::Pow: return std::pow(eval_node(*n.lhs, vars), eval_node(*n.rhs, vars));
        case K::Exp: return std::exp(eval_node(*n.lhs, vars));
        case K::Log: return std::log(eval_node(*n.lhs, vars));
        case K::Neg: return -eval_node(*n.lhs, vars);
    }
    throw std::logic_error("unreachable expression node");
}

}  // namespace

Expr Expr::parse(const std::string& source, const std::vector<std::string>& allowed_vars) {
    Expr e;
    e.source_ = source;
    e.root_ = Parser(source, allowed_vars).parse();
    return e;
}

double Expr::eval(const std::map<std::string, double>& vars) const {
    return eval_node(*root_, vars);
}

double Expr::eval_x(double x) const { return eval({{"x", x}}); }

}  // namespace statmanifold
