#include "tpfem/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace tpfem {

namespace {

using Node = Expression::Node;
using NodePtr = Expression::NodePtr;
using Kind = Expression::Kind;
using Fn = Expression::Fn;

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

NodePtr num(double v) { return make_node({Kind::Number, v}); }

bool is_number(const NodePtr& n, double v) {
    return n->kind == Kind::Number && n->number == v;
}

// Constant folding keeps derivatives readable; no algebraic rewrites beyond
// identities with 0 and 1.
NodePtr simplify(Kind k, NodePtr a, NodePtr b) {
    if (a && a->kind == Kind::Number && (!b || b->kind == Kind::Number)) {
        double x = a->number, y = b ? b->number : 0.0;
        switch (k) {
            case Kind::Neg: return num(-x);
            case Kind::Add: return num(x + y);
            case Kind::Sub: return num(x - y);
            case Kind::Mul: return num(x * y);
            case Kind::Div: if (y != 0.0) return num(x / y); break;
            case Kind::Pow: return num(std::pow(x, y));
            default: break;
        }
    }
    switch (k) {
        case Kind::Add:
            if (is_number(a, 0.0)) return b;
            if (is_number(b, 0.0)) return a;
            break;
        case Kind::Sub:
            if (is_number(b, 0.0)) return a;
            if (is_number(a, 0.0)) return make_node({Kind::Neg, 0.0, Fn::Sin, b, nullptr});
            break;
        case Kind::Mul:
            if (is_number(a, 0.0) || is_number(b, 0.0)) return num(0.0);
            if (is_number(a, 1.0)) return b;
            if (is_number(b, 1.0)) return a;
            break;
        case Kind::Div:
            if (is_number(a, 0.0)) return num(0.0);
            if (is_number(b, 1.0)) return a;
            break;
        case Kind::Pow:
            if (is_number(b, 1.0)) return a;
            if (is_number(b, 0.0)) return num(1.0);
            break;
        case Kind::Neg:
            if (a->kind == Kind::Neg) return a->a;
            break;
        default: break;
    }
    return make_node({k, 0.0, Fn::Sin, std::move(a), std::move(b)});
}

NodePtr simplify(Kind k, NodePtr a) { return simplify(k, std::move(a), nullptr); }

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr run() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
        NodePtr e = parse_sum();
        skip_ws();
        if (pos_ < text_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (eat('+')) lhs = simplify(Kind::Add, lhs, parse_product());
            else if (eat('-')) lhs = simplify(Kind::Sub, lhs, parse_product());
            else return lhs;
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (eat('*')) lhs = simplify(Kind::Mul, lhs, parse_unary());
            else if (eat('/')) lhs = simplify(Kind::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) return simplify(Kind::Neg, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (eat('^')) {
            // right-associative; exponent may carry a unary minus
            return simplify(Kind::Pow, base, parse_unary());
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_sum();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    NodePtr parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // 'e' belonged to something else
            }
        }
        std::string tok(text_.substr(start, pos_ - start));
        try {
            return num(std::stod(tok));
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + tok + "'", start);
        }
    }

    NodePtr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (name == "x") return make_node({Kind::VarX});
        if (name == "eps") return make_node({Kind::VarEps});
        Fn fn;
        if (name == "sin") fn = Fn::Sin;
        else if (name == "cos") fn = Fn::Cos;
        else if (name == "exp") fn = Fn::Exp;
        else if (name == "log") fn = Fn::Log;
        else if (name == "sqrt") fn = Fn::Sqrt;
        else throw ParseError("unknown identifier '" + name + "'", start);
        if (!eat('(')) throw ParseError("expected '(' after '" + name + "'", pos_);
        NodePtr arg = parse_sum();
        if (!eat(')')) throw ParseError("expected ')'", pos_);
        return make_node({Kind::Call, 0.0, fn, std::move(arg), nullptr});
    }
};

double eval_node(const Node* n, double x, double eps) {
    switch (n->kind) {
        case Kind::Number: return n->number;
        case Kind::VarX: return x;
        case Kind::VarEps: return eps;
        case Kind::Neg: return -eval_node(n->a.get(), x, eps);
        case Kind::Add: return eval_node(n->a.get(), x, eps) + eval_node(n->b.get(), x, eps);
        case Kind::Sub: return eval_node(n->a.get(), x, eps) - eval_node(n->b.get(), x, eps);
        case Kind::Mul: return eval_node(n->a.get(), x, eps) * eval_node(n->b.get(), x, eps);
        case Kind::Div: return eval_node(n->a.get(), x, eps) / eval_node(n->b.get(), x, eps);
        case Kind::Pow: return std::pow(eval_node(n->a.get(), x, eps), eval_node(n->b.get(), x, eps));
        case Kind::Call: {
            double v = eval_node(n->a.get(), x, eps);
            switch (n->fn) {
                case Fn::Sin: return std::sin(v);
                case Fn::Cos: return std::cos(v);
                case Fn::Exp: return std::exp(v);
                case Fn::Log: return std::log(v);
                case Fn::Sqrt: return std::sqrt(v);
            }
        }
    }
    return 0.0;
}

NodePtr diff(const NodePtr& n);

NodePtr diff_call(const NodePtr& n) {
    const NodePtr& u = n->a;
    NodePtr du = diff(u);
    NodePtr inner;
    switch (n->fn) {
        case Fn::Sin: inner = make_node({Kind::Call, 0.0, Fn::Cos, u, nullptr}); break;
        case Fn::Cos:
            inner = simplify(Kind::Neg, make_node({Kind::Call, 0.0, Fn::Sin, u, nullptr}));
            break;
        case Fn::Exp: inner = make_node({Kind::Call, 0.0, Fn::Exp, u, nullptr}); break;
        case Fn::Log: inner = simplify(Kind::Div, num(1.0), u); break;
        case Fn::Sqrt:
            inner = simplify(Kind::Div, num(0.5),
                             make_node({Kind::Call, 0.0, Fn::Sqrt, u, nullptr}));
            break;
    }
    return simplify(Kind::Mul, inner, du);
}

NodePtr diff(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Number:
        case Kind::VarEps: return num(0.0);
        case Kind::VarX: return num(1.0);
        case Kind::Neg: return simplify(Kind::Neg, diff(n->a));
        case Kind::Add: return simplify(Kind::Add, diff(n->a), diff(n->b));
        case Kind::Sub: return simplify(Kind::Sub, diff(n->a), diff(n->b));
        case Kind::Mul:
            return simplify(Kind::Add, simplify(Kind::Mul, diff(n->a), n->b),
                            simplify(Kind::Mul, n->a, diff(n->b)));
        case Kind::Div:
            return simplify(
                Kind::Div,
                simplify(Kind::Sub, simplify(Kind::Mul, diff(n->a), n->b),
                         simplify(Kind::Mul, n->a, diff(n->b))),
                simplify(Kind::Pow, n->b, num(2.0)));
        case Kind::Pow: {
            if (n->b->kind == Kind::Number) {
                // d(u^c) = c*u^(c-1)*u'
                NodePtr p = simplify(Kind::Pow, n->a, num(n->b->number - 1.0));
                return simplify(Kind::Mul, simplify(Kind::Mul, num(n->b->number), p), diff(n->a));
            }
            // general u^v = exp(v*log(u))
            NodePtr logu = make_node({Kind::Call, 0.0, Fn::Log, n->a, nullptr});
            NodePtr term1 = simplify(Kind::Mul, diff(n->b), logu);
            NodePtr term2 = simplify(Kind::Div, simplify(Kind::Mul, n->b, diff(n->a)), n->a);
            return simplify(Kind::Mul, make_node({Kind::Pow, 0.0, Fn::Sin, n->a, n->b}),
                            simplify(Kind::Add, term1, term2));
        }
        case Kind::Call: return diff_call(n);
    }
    return num(0.0);
}

void print_node(const Node* n, std::ostream& os) {
    switch (n->kind) {
        case Kind::Number: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n->number;
            std::string s = tmp.str();
            if (n->number < 0) os << '(' << s << ')';
            else os << s;
            return;
        }
        case Kind::VarX: os << 'x'; return;
        case Kind::VarEps: os << "eps"; return;
        case Kind::Neg:
            os << "(-";
            print_node(n->a.get(), os);
            os << ')';
            return;
        case Kind::Add:
        case Kind::Sub:
        case Kind::Mul:
        case Kind::Div:
        case Kind::Pow: {
            char op = n->kind == Kind::Add ? '+'
                      : n->kind == Kind::Sub ? '-'
                      : n->kind == Kind::Mul ? '*'
                      : n->kind == Kind::Div ? '/'
                                             : '^';
            os << '(';
            print_node(n->a.get(), os);
            os << ' ' << op << ' ';
            print_node(n->b.get(), os);
            os << ')';
            return;
        }
        case Kind::Call: {
            const char* name = n->fn == Fn::Sin ? "sin"
                               : n->fn == Fn::Cos ? "cos"
                               : n->fn == Fn::Exp ? "exp"
                               : n->fn == Fn::Log ? "log"
                                                  : "sqrt";
            os << name << '(';
            print_node(n->a.get(), os);
            os << ')';
            return;
        }
    }
}

bool equal_nodes(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Kind::Number: return a->number == b->number;
        case Kind::VarX:
        case Kind::VarEps: return true;
        case Kind::Call:
            if (a->fn != b->fn) return false;
            return equal_nodes(a->a.get(), b->a.get());
        case Kind::Neg: return equal_nodes(a->a.get(), b->a.get());
        default:
            return equal_nodes(a->a.get(), b->a.get()) && equal_nodes(a->b.get(), b->b.get());
    }
}

}  // namespace

Expression Expression::parse(std::string_view text) {
    Parser p(text);
    return Expression(p.run());
}

Expression Expression::number(double v) { return Expression(num(v)); }
Expression Expression::var_x() { return Expression(make_node({Kind::VarX})); }
Expression Expression::var_eps() { return Expression(make_node({Kind::VarEps})); }

double Expression::eval(double x, double eps) const {
    if (!root_) throw ConfigError("evaluating empty expression");
    return eval_node(root_.get(), x, eps);
}

Expression Expression::derivative() const {
    if (!root_) throw ConfigError("differentiating empty expression");
    return Expression(diff(root_));
}

std::string Expression::to_string() const {
    if (!root_) return "";
    std::ostringstream os;
    print_node(root_.get(), os);
    return os.str();
}

bool operator==(const Expression& a, const Expression& b) {
    return equal_nodes(a.root_.get(), b.root_.get());
}

Expression operator+(const Expression& a, const Expression& b) {
    return Expression(simplify(Kind::Add, a.root(), b.root()));
}
Expression operator-(const Expression& a, const Expression& b) {
    return Expression(simplify(Kind::Sub, a.root(), b.root()));
}
Expression operator*(const Expression& a, const Expression& b) {
    return Expression(simplify(Kind::Mul, a.root(), b.root()));
}
Expression operator-(const Expression& a) {
    return Expression(simplify(Kind::Neg, a.root()));
}
Expression Expression::call(Fn fn, const Expression& arg) {
    return Expression(make_node({Kind::Call, 0.0, fn, arg.root(), nullptr}));
}

}  // namespace tpfem
