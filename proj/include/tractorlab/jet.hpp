#pragma once

#include <span>
#include <unordered_map>
#include <vector>

namespace tractorlab {

// Index tables for jets in `dim` variables truncated at total degree `order`.
// Multi-indices are stored graded-lexicographically: by total degree, then
// lexicographically with the exponent of x^0 descending. For dim 2, order 2:
//   1, x0, x1, x0^2, x0 x1, x1^2
// The layout of a lower order is a prefix of the layout of a higher one.
struct JetLayout {
    int dim = 0;
    int order = 0;
    int size = 0;
    std::vector<int> exps;                 // size * dim exponents
    std::vector<std::vector<int>> raise;   // raise[i][k]: index of m_k + e_i, or -1
    std::vector<int> mul_a, mul_b, mul_c;  // c += a * b triplets
    std::unordered_map<long long, int> lookup;

    std::span<const int> multi(int k) const { return {exps.data() + k * dim, static_cast<size_t>(dim)}; }
    int index_of(std::span<const int> m) const;
    int degree(int k) const;
};

const JetLayout& jet_layout(int dim, int order);

int jet_size(int dim, int order);

class Jet {
public:
    Jet() = default;

    static Jet constant(int dim, int order, double c);
    static Jet variable(int i, double x0, int dim, int order);
    static Jet zero(int dim, int order) { return constant(dim, order, 0.0); }

    int dim() const { return layout_ ? layout_->dim : 0; }
    int order() const { return layout_ ? layout_->order : -1; }
    bool valid() const { return layout_ != nullptr; }
    const JetLayout& layout() const { return *layout_; }

    double value() const { return c_[0]; }
    std::span<const double> coeffs() const { return c_; }
    std::span<double> coeffs() { return c_; }
    double coeff(std::span<const int> multi) const;
    // Partial derivative at the base point for multi-index `multi` (coeff * m!).
    double derivative(std::span<const int> multi) const;
    double max_abs() const;

    Jet truncated(int order) const;
    Jet partial(int i) const;

    Jet operator-() const;
    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator/=(const Jet& o);
    Jet& operator+=(double s);
    Jet& operator-=(double s);
    Jet& operator*=(double s);
    Jet& operator/=(double s);

    Jet reciprocal() const;

private:
    Jet(const JetLayout* l) : layout_(l), c_(l->size, 0.0) {}
    friend Jet operator*(const Jet& a, const Jet& b);
    friend class JetAccess;

    const JetLayout* layout_ = nullptr;
    std::vector<double> c_;
};

// Mixed-order operands are truncated to the smaller order.
Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, const Jet& a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator/(Jet a, double s);
Jet operator/(double s, const Jet& a);

enum class JetFn { Exp, Log, Sqrt, PowConst, Sin, Cos, Tan, Atan, AbsSmooth };

// Univariate Taylor composition f(a); `p` is the exponent for PowConst.
Jet jet_apply(JetFn f, const Jet& a, double p = 0.0);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double p);
Jet ipow(const Jet& a, int k);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
Jet atan(const Jet& a);
Jet abs_smooth(const Jet& a);

}  // namespace tractorlab
