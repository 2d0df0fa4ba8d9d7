#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tractorlab/jet.hpp"

namespace tractorlab {

enum class Func { Exp, Log, Sqrt, Sin, Cos, Tan, Atan };

const char* func_name(Func f);

// Immutable expression tree over chart coordinates.
class Expr {
public:
    enum class Kind { Num, Var, Pi, Neg, Add, Sub, Mul, Div, Pow, Call };

    Expr() = default;

    static Expr num(double v);
    static Expr var(int index, std::string name);
    static Expr pi();
    static Expr neg(Expr a);
    static Expr binary(Kind k, Expr a, Expr b);
    static Expr pow(Expr base, double exponent);
    static Expr call(Func f, Expr arg);

    bool valid() const { return n_ != nullptr; }
    Kind kind() const;
    double number() const;       // Num literal, or Pow exponent
    int var_index() const;
    const std::string& var_name() const;
    Func func() const;
    const Expr& lhs() const;     // Neg/Call/Pow operand, or left of a binary node
    const Expr& rhs() const;

    friend bool operator==(const Expr& a, const Expr& b);

    struct Node;

private:
    std::shared_ptr<const Node> n_;
};

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);

Expr parse_expr(std::string_view src, const std::vector<std::string>& coords);
std::string print_expr(const Expr& e);

std::vector<Jet> coordinate_jets(std::span<const double> p, int order);
Jet eval_jet(const Expr& e, const std::vector<Jet>& vars);
Jet eval_jet(const Expr& e, std::span<const double> p, int order);

// Plain scalar evaluation; independent of the jet code path.
double eval_scalar(const Expr& e, std::span<const double> p);
long double eval_scalar_ld(const Expr& e, std::span<const long double> p);

}  // namespace tractorlab
