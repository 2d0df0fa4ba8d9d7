#include "tractorlab/expr.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "tractorlab/errors.hpp"

namespace tractorlab {

struct Expr::Node {
    Kind kind = Kind::Num;
    double value = 0.0;
    int index = -1;
    std::string name;
    Func func = Func::Exp;
    Expr a, b;
};

namespace {
std::shared_ptr<Expr::Node> make_node(Expr::Kind k, double v = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->value = v;
    return n;
}
}  // namespace

const char* func_name(Func f) {
    switch (f) {
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Tan: return "tan";
        case Func::Atan: return "atan";
    }
    return "?";
}

Expr Expr::num(double v) {
    Expr e;
    e.n_ = make_node(Kind::Num, v);
    return e;
}

Expr Expr::var(int index, std::string name) {
    Expr e;
    auto n = make_node(Kind::Var);
    n->index = index;
    n->name = std::move(name);
    e.n_ = std::move(n);
    return e;
}

Expr Expr::pi() {
    Expr e;
    e.n_ = make_node(Kind::Pi);
    return e;
}

Expr Expr::neg(Expr a) {
    Expr e;
    auto n = make_node(Kind::Neg);
    n->a = std::move(a);
    e.n_ = std::move(n);
    return e;
}

Expr Expr::binary(Kind k, Expr a, Expr b) {
    Expr e;
    auto n = make_node(k);
    n->a = std::move(a);
    n->b = std::move(b);
    e.n_ = std::move(n);
    return e;
}

Expr Expr::pow(Expr base, double exponent) {
    Expr e;
    auto n = make_node(Kind::Pow, exponent);
    n->a = std::move(base);
    e.n_ = std::move(n);
    return e;
}

Expr Expr::call(Func f, Expr arg) {
    Expr e;
    auto n = make_node(Kind::Call);
    n->func = f;
    n->a = std::move(arg);
    e.n_ = std::move(n);
    return e;
}

Expr::Kind Expr::kind() const { return n_->kind; }
double Expr::number() const { return n_->value; }
int Expr::var_index() const { return n_->index; }
const std::string& Expr::var_name() const { return n_->name; }
Func Expr::func() const { return n_->func; }
const Expr& Expr::lhs() const { return n_->a; }
const Expr& Expr::rhs() const { return n_->b; }

bool operator==(const Expr& x, const Expr& y) {
    if (x.n_ == y.n_) return true;
    if (!x.n_ || !y.n_) return false;
    const auto& a = *x.n_;
    const auto& b = *y.n_;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::Num: return a.value == b.value;
        case Expr::Kind::Var: return a.index == b.index && a.name == b.name;
        case Expr::Kind::Pi: return true;
        case Expr::Kind::Neg: return a.a == b.a;
        case Expr::Kind::Pow: return a.value == b.value && a.a == b.a;
        case Expr::Kind::Call: return a.func == b.func && a.a == b.a;
        default: return a.a == b.a && a.b == b.b;
    }
}

Expr operator+(Expr a, Expr b) { return Expr::binary(Expr::Kind::Add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return Expr::binary(Expr::Kind::Sub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return Expr::binary(Expr::Kind::Mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return Expr::binary(Expr::Kind::Div, std::move(a), std::move(b)); }
Expr operator-(Expr a) { return Expr::neg(std::move(a)); }

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& coords) : s_(src), coords_(coords) {}

    Expr run() {
        Expr e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg, ParseError::Kind k = ParseError::Kind::Syntax) {
        throw ParseError(k, pos_, msg);
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (accept('+')) e = e + term();
            else if (accept('-')) e = e - term();
            else return e;
        }
    }

    Expr term() {
        Expr e = factor();
        for (;;) {
            if (accept('*')) e = e * factor();
            else if (accept('/')) e = e / factor();
            else return e;
        }
    }

    Expr factor() {
        if (accept('-')) {
            // a minus directly on a literal is part of the literal; "-(3)" stays a negation
            skip_ws();
            bool literal = pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.');
            Expr inner = factor();
            if (literal && inner.kind() == Expr::Kind::Num) return Expr::num(-inner.number());
            return -inner;
        }
        Expr base = atom();
        if (accept('^')) return Expr::pow(base, exponent());
        return base;
    }

    // number, optionally signed, optionally followed by a right-associative
    // chain of further constant exponents
    double exponent() {
        bool negative = accept('-');
        skip_ws();
        if (pos_ >= s_.size() || !(std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
            fail("exponent must be a numeric literal");
        double v = number();
        if (negative) v = -v;
        if (accept('^')) v = std::pow(v, exponent());
        return v;
    }

    double number() {
        size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (ec != std::errc() || ptr != s_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return v;
    }

    Expr atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expr::num(number());
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string id(s_.substr(start, pos_ - start));
            skip_ws();
            bool call = pos_ < s_.size() && s_[pos_] == '(';
            static const std::pair<const char*, Func> funcs[] = {
                {"exp", Func::Exp}, {"log", Func::Log}, {"sqrt", Func::Sqrt}, {"sin", Func::Sin},
                {"cos", Func::Cos}, {"tan", Func::Tan}, {"atan", Func::Atan}};
            for (auto& [name, f] : funcs) {
                if (id == name) {
                    if (!call) {
                        pos_ = start;
                        fail("function '" + id + "' needs one argument", ParseError::Kind::Arity);
                    }
                    ++pos_;
                    Expr arg = expr();
                    skip_ws();
                    if (pos_ < s_.size() && s_[pos_] == ',')
                        fail("function '" + id + "' takes exactly one argument", ParseError::Kind::Arity);
                    expect(')');
                    return Expr::call(f, arg);
                }
            }
            int idx = -1;
            for (size_t k = 0; k < coords_.size(); ++k)
                if (coords_[k] == id) idx = static_cast<int>(k);
            if (idx < 0 && id != "pi") {
                pos_ = start;
                fail("unknown identifier '" + id + "'", ParseError::Kind::UnknownIdentifier);
            }
            if (call) fail("'" + id + "' is not a function", ParseError::Kind::Arity);
            return idx >= 0 ? Expr::var(idx, id) : Expr::pi();
        }
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    std::string_view s_;
    const std::vector<std::string>& coords_;
    size_t pos_ = 0;
};

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// Binding strength used when deciding on parentheses.
int precedence(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Add:
        case Expr::Kind::Sub: return 1;
        case Expr::Kind::Mul:
        case Expr::Kind::Div: return 2;
        case Expr::Kind::Neg: return 3;
        case Expr::Kind::Num: return e.number() < 0 ? 3 : 5;
        case Expr::Kind::Pow: return 4;
        default: return 5;
    }
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
    if (wrap) out += '(';
    print(e, out);
    if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Num: out += format_number(e.number()); break;
        case K::Var: out += e.var_name(); break;
        case K::Pi: out += "pi"; break;
        case K::Neg:
            out += '-';
            print_wrapped(e.lhs(), precedence(e.lhs()) < 3 || e.lhs().kind() == K::Num, out);
            break;
        case K::Pow:
            print_wrapped(e.lhs(), precedence(e.lhs()) < 5, out);
            out += '^';
            out += format_number(e.number());
            break;
        case K::Call:
            out += func_name(e.func());
            out += '(';
            print(e.lhs(), out);
            out += ')';
            break;
        case K::Add:
        case K::Sub:
        case K::Mul:
        case K::Div: {
            int p = precedence(e);
            print_wrapped(e.lhs(), precedence(e.lhs()) < p, out);
            out += e.kind() == K::Add ? " + " : e.kind() == K::Sub ? " - " : e.kind() == K::Mul ? "*" : "/";
            print_wrapped(e.rhs(), precedence(e.rhs()) <= p, out);
            break;
        }
    }
}

template <class T>
T eval_scalar_t(const Expr& e, std::span<const T> p) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Num: return static_cast<T>(e.number());
        case K::Var: return p[e.var_index()];
        case K::Pi: return std::numbers::pi_v<T>;
        case K::Neg: return -eval_scalar_t(e.lhs(), p);
        case K::Add: return eval_scalar_t(e.lhs(), p) + eval_scalar_t(e.rhs(), p);
        case K::Sub: return eval_scalar_t(e.lhs(), p) - eval_scalar_t(e.rhs(), p);
        case K::Mul: return eval_scalar_t(e.lhs(), p) * eval_scalar_t(e.rhs(), p);
        case K::Div: return eval_scalar_t(e.lhs(), p) / eval_scalar_t(e.rhs(), p);
        case K::Pow: return std::pow(eval_scalar_t(e.lhs(), p), static_cast<T>(e.number()));
        case K::Call: {
            T a = eval_scalar_t(e.lhs(), p);
            switch (e.func()) {
                case Func::Exp: return std::exp(a);
                case Func::Log: return std::log(a);
                case Func::Sqrt: return std::sqrt(a);
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Tan: return std::tan(a);
                case Func::Atan: return std::atan(a);
            }
        }
    }
    return T(0);
}

}  // namespace

Expr parse_expr(std::string_view src, const std::vector<std::string>& coords) {
    return Parser(src, coords).run();
}

std::string print_expr(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

std::vector<Jet> coordinate_jets(std::span<const double> p, int order) {
    int dim = static_cast<int>(p.size());
    std::vector<Jet> v;
    v.reserve(dim);
    for (int i = 0; i < dim; ++i) v.push_back(Jet::variable(i, p[i], dim, order));
    return v;
}

Jet eval_jet(const Expr& e, const std::vector<Jet>& vars) {
    using K = Expr::Kind;
    const Jet& proto = vars.front();
    switch (e.kind()) {
        case K::Num: return Jet::constant(proto.dim(), proto.order(), e.number());
        case K::Var: return vars.at(e.var_index());
        case K::Pi: return Jet::constant(proto.dim(), proto.order(), std::numbers::pi);
        case K::Neg: return -eval_jet(e.lhs(), vars);
        case K::Add: return eval_jet(e.lhs(), vars) + eval_jet(e.rhs(), vars);
        case K::Sub: return eval_jet(e.lhs(), vars) - eval_jet(e.rhs(), vars);
        case K::Mul: return eval_jet(e.lhs(), vars) * eval_jet(e.rhs(), vars);
        case K::Div: return eval_jet(e.lhs(), vars) / eval_jet(e.rhs(), vars);
        case K::Pow: return pow(eval_jet(e.lhs(), vars), e.number());
        case K::Call: {
            Jet a = eval_jet(e.lhs(), vars);
            switch (e.func()) {
                case Func::Exp: return exp(a);
                case Func::Log: return log(a);
                case Func::Sqrt: return sqrt(a);
                case Func::Sin: return sin(a);
                case Func::Cos: return cos(a);
                case Func::Tan: return tan(a);
                case Func::Atan: return atan(a);
            }
        }
    }
    throw Error("malformed expression");
}

Jet eval_jet(const Expr& e, std::span<const double> p, int order) { return eval_jet(e, coordinate_jets(p, order)); }

double eval_scalar(const Expr& e, std::span<const double> p) { return eval_scalar_t<double>(e, p); }

long double eval_scalar_ld(const Expr& e, std::span<const long double> p) { return eval_scalar_t<long double>(e, p); }

}  // namespace tractorlab
