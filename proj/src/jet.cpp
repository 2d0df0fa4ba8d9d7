#include "tractorlab/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "tractorlab/errors.hpp"

namespace tractorlab {

namespace {

long long encode(std::span<const int> m, int order) {
    long long key = 0;
    for (int e : m) key = key * (order + 1) + e;
    return key;
}

// Exponent vectors of total degree `deg`, x^0 exponent descending.
void enumerate_degree(int dim, int deg, std::vector<int>& cur, int pos, std::vector<int>& out) {
    if (pos == dim - 1) {
        cur[pos] = deg;
        out.insert(out.end(), cur.begin(), cur.end());
        return;
    }
    for (int e = deg; e >= 0; --e) {
        cur[pos] = e;
        enumerate_degree(dim, deg - e, cur, pos + 1, out);
    }
}

std::unique_ptr<JetLayout> build_layout(int dim, int order) {
    auto l = std::make_unique<JetLayout>();
    l->dim = dim;
    l->order = order;
    std::vector<int> cur(dim, 0);
    for (int d = 0; d <= order; ++d) enumerate_degree(dim, d, cur, 0, l->exps);
    l->size = static_cast<int>(l->exps.size()) / dim;
    for (int k = 0; k < l->size; ++k) l->lookup.emplace(encode(l->multi(k), order), k);

    l->raise.assign(dim, std::vector<int>(l->size, -1));
    std::vector<int> m(dim);
    for (int k = 0; k < l->size; ++k) {
        auto mk = l->multi(k);
        for (int i = 0; i < dim; ++i) {
            std::copy(mk.begin(), mk.end(), m.begin());
            ++m[i];
            auto it = l->lookup.find(encode(m, order));
            if (it != l->lookup.end()) l->raise[i][k] = it->second;
        }
    }

    for (int a = 0; a < l->size; ++a) {
        auto ma = l->multi(a);
        int da = l->degree(a);
        for (int b = 0; b < l->size; ++b) {
            if (da + l->degree(b) > order) break;  // degrees are nondecreasing in b
            auto mb = l->multi(b);
            for (int i = 0; i < dim; ++i) m[i] = ma[i] + mb[i];
            l->mul_a.push_back(a);
            l->mul_b.push_back(b);
            l->mul_c.push_back(l->lookup.at(encode(m, order)));
        }
    }
    return l;
}

}  // namespace

int JetLayout::index_of(std::span<const int> m) const {
    if (static_cast<int>(m.size()) != dim) throw IndexError("multi-index has wrong length");
    int total = 0;
    for (int e : m) {
        if (e < 0) throw IndexError("negative exponent in multi-index");
        total += e;
    }
    if (total > order) return -1;
    return lookup.at(encode(m, order));
}

int JetLayout::degree(int k) const {
    int s = 0;
    for (int e : multi(k)) s += e;
    return s;
}

const JetLayout& jet_layout(int dim, int order) {
    if (dim < 1) throw IndexError("jet dimension must be positive");
    if (order < 0) throw JetOrderError("negative jet order");
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{dim, order}];
    if (!slot) slot = build_layout(dim, order);
    return *slot;
}

int jet_size(int dim, int order) {
    // binomial(dim + order, order)
    long long r = 1;
    for (int k = 1; k <= order; ++k) r = r * (dim + k) / k;
    return static_cast<int>(r);
}

Jet Jet::constant(int dim, int order, double c) {
    Jet j(&jet_layout(dim, order));
    j.c_[0] = c;
    return j;
}

Jet Jet::variable(int i, double x0, int dim, int order) {
    if (i < 0 || i >= dim)
        throw IndexError("variable index " + std::to_string(i) + " out of range for dim " + std::to_string(dim));
    Jet j = constant(dim, order, x0);
    if (order >= 1) j.c_[1 + i] = 1.0;
    return j;
}

double Jet::coeff(std::span<const int> multi) const {
    int k = layout_->index_of(multi);
    return k < 0 ? 0.0 : c_[k];
}

double Jet::derivative(std::span<const int> multi) const {
    double f = 1.0;
    for (int e : multi)
        for (int q = 2; q <= e; ++q) f *= q;
    return coeff(multi) * f;
}

double Jet::max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
}

Jet Jet::truncated(int order) const {
    if (order > this->order()) throw JetOrderError("cannot raise jet order by truncation");
    if (order == this->order()) return *this;
    Jet j(&jet_layout(dim(), order));
    std::copy_n(c_.begin(), j.c_.size(), j.c_.begin());
    return j;
}

Jet Jet::partial(int i) const {
    if (order() < 1) throw JetOrderError("partial derivative of an order-0 jet");
    if (i < 0 || i >= dim()) throw IndexError("partial derivative index out of range");
    Jet j(&jet_layout(dim(), order() - 1));
    const auto& up = layout_->raise[i];
    for (int k = 0; k < j.layout_->size; ++k) {
        int src = up[k];
        j.c_[k] = (layout_->exps[src * dim() + i]) * c_[src];
    }
    return j;
}

namespace {

void align(Jet& a, const Jet& b, Jet& bt) {
    if (a.dim() != b.dim()) throw IndexError("jet dimension mismatch");
    if (a.order() > b.order()) {
        a = a.truncated(b.order());
        bt = b;
    } else if (b.order() > a.order()) {
        bt = b.truncated(a.order());
    } else {
        bt = b;
    }
}

}  // namespace

Jet Jet::operator-() const {
    Jet j = *this;
    for (double& v : j.c_) v = -v;
    return j;
}

Jet& Jet::operator+=(const Jet& o) {
    if (order() == o.order() && dim() == o.dim()) {
        for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
        return *this;
    }
    Jet bt;
    align(*this, o, bt);
    for (size_t k = 0; k < c_.size(); ++k) c_[k] += bt.c_[k];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    if (order() == o.order() && dim() == o.dim()) {
        for (size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Jet bt;
    align(*this, o, bt);
    for (size_t k = 0; k < c_.size(); ++k) c_[k] -= bt.c_[k];
    return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
    if (a.dim() != b.dim()) throw IndexError("jet dimension mismatch");
    if (a.order() != b.order()) {
        int o = std::min(a.order(), b.order());
        return a.truncated(o) * b.truncated(o);
    }
    const JetLayout* l = a.layout_;
    Jet r(l);
    const double* pa = a.c_.data();
    const double* pb = b.c_.data();
    double* pc = r.c_.data();
    const size_t n = l->mul_a.size();
    const int* ia = l->mul_a.data();
    const int* ib = l->mul_b.data();
    const int* ic = l->mul_c.data();
    for (size_t t = 0; t < n; ++t) pc[ic[t]] += pa[ia[t]] * pb[ib[t]];
    return r;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet Jet::reciprocal() const {
    double b0 = c_[0];
    if (b0 == 0.0) throw PoleError("division by a jet with zero constant term");
    // 1/b = (1/b0) * sum_k (-u)^k with u = b/b0 - 1 nilpotent.
    Jet u = *this / b0;
    u.c_[0] = 0.0;
    Jet r = constant(dim(), order(), 1.0);
    for (int k = 0; k < order(); ++k) {
        r = r * u;
        for (double& v : r.c_) v = -v;
        r.c_[0] += 1.0;
    }
    return r / b0;
}

Jet& Jet::operator/=(const Jet& o) { return *this = *this * o.reciprocal(); }

Jet& Jet::operator+=(double s) {
    c_[0] += s;
    return *this;
}
Jet& Jet::operator-=(double s) {
    c_[0] -= s;
    return *this;
}
Jet& Jet::operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
}
Jet& Jet::operator/=(double s) {
    if (s == 0.0) throw PoleError("division of a jet by zero");
    for (double& v : c_) v /= s;
    return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator/(const Jet& a, const Jet& b) { return a * b.reciprocal(); }
Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a -= s; }
Jet operator-(double s, const Jet& a) { return (-a) += s; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator/(Jet a, double s) { return a /= s; }
Jet operator/(double s, const Jet& a) { return a.reciprocal() *= s; }

namespace {

// sum_k c[k] u^k for nilpotent u (zero constant term).
Jet compose(const std::vector<double>& c, const Jet& a) {
    Jet u = a;
    u.coeffs()[0] = 0.0;
    int K = a.order();
    Jet r = Jet::constant(a.dim(), K, c[K]);
    for (int k = K - 1; k >= 0; --k) {
        r = r * u;
        r += c[k];
    }
    return r;
}

// Coefficients of 1/p(t) for a univariate polynomial p with p[0] != 0.
std::vector<double> series_reciprocal(const std::vector<double>& p, int K) {
    std::vector<double> q(K + 1, 0.0);
    q[0] = 1.0 / p[0];
    for (int k = 1; k <= K; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k && i < static_cast<int>(p.size()); ++i) s += p[i] * q[k - i];
        q[k] = -s / p[0];
    }
    return q;
}

bool is_integer(double p) { return std::isfinite(p) && p == std::floor(p) && std::abs(p) <= 1024; }

}  // namespace

Jet ipow(const Jet& a, int k) {
    if (k < 0) return ipow(a, -k).reciprocal();
    Jet r = Jet::constant(a.dim(), a.order(), 1.0);
    Jet base = a;
    while (k > 0) {
        if (k & 1) r = r * base;
        k >>= 1;
        if (k) base = base * base;
    }
    return r;
}

Jet jet_apply(JetFn f, const Jet& a, double p) {
    const int K = a.order();
    const double a0 = a.value();
    std::vector<double> c(K + 1, 0.0);
    double fact = 1.0;
    switch (f) {
        case JetFn::Exp: {
            double e = std::exp(a0);
            for (int k = 0; k <= K; ++k) {
                if (k > 0) fact *= k;
                c[k] = e / fact;
            }
            break;
        }
        case JetFn::Log: {
            if (!(a0 > 0.0)) throw DomainError("log of a jet with nonpositive constant term");
            c[0] = std::log(a0);
            double pw = 1.0;
            for (int k = 1; k <= K; ++k) {
                pw *= a0;
                c[k] = ((k % 2) ? 1.0 : -1.0) / (k * pw);
            }
            break;
        }
        case JetFn::Sqrt:
            if (!(a0 > 0.0)) throw DomainError("sqrt of a jet with nonpositive constant term");
            return jet_apply(JetFn::PowConst, a, 0.5);
        case JetFn::PowConst: {
            if (is_integer(p)) return ipow(a, static_cast<int>(p));
            if (!(a0 > 0.0)) throw DomainError("non-integer power of a jet with nonpositive constant term");
            double b = 1.0;
            for (int k = 0; k <= K; ++k) {
                if (k > 0) b *= (p - k + 1) / k;
                c[k] = b * std::pow(a0, p - k);
            }
            break;
        }
        case JetFn::Sin:
        case JetFn::Cos: {
            double shift = (f == JetFn::Cos) ? std::numbers::pi / 2 : 0.0;
            for (int k = 0; k <= K; ++k) {
                if (k > 0) fact *= k;
                c[k] = std::sin(a0 + shift + k * std::numbers::pi / 2) / fact;
            }
            break;
        }
        case JetFn::Tan: {
            if (std::abs(std::cos(a0)) < 1e-14) throw DomainError("tan at a pole");
            // T' = 1 + T^2
            c[0] = std::tan(a0);
            for (int k = 0; k < K; ++k) {
                double s = (k == 0) ? 1.0 : 0.0;
                for (int i = 0; i <= k; ++i) s += c[i] * c[k - i];
                c[k + 1] = s / (k + 1);
            }
            break;
        }
        case JetFn::Atan: {
            // atan' = 1 / (1 + (a0 + t)^2)
            auto q = series_reciprocal({1.0 + a0 * a0, 2.0 * a0, 1.0}, K);
            c[0] = std::atan(a0);
            for (int k = 0; k < K; ++k) c[k + 1] = q[k] / (k + 1);
            break;
        }
        case JetFn::AbsSmooth:
            if (a0 == 0.0) throw DomainError("abs is not smooth at a zero constant term");
            return a0 > 0.0 ? a : -a;
    }
    return compose(c, a);
}

Jet exp(const Jet& a) { return jet_apply(JetFn::Exp, a); }
Jet log(const Jet& a) { return jet_apply(JetFn::Log, a); }
Jet sqrt(const Jet& a) { return jet_apply(JetFn::Sqrt, a); }
Jet pow(const Jet& a, double p) { return jet_apply(JetFn::PowConst, a, p); }
Jet sin(const Jet& a) { return jet_apply(JetFn::Sin, a); }
Jet cos(const Jet& a) { return jet_apply(JetFn::Cos, a); }
Jet tan(const Jet& a) { return jet_apply(JetFn::Tan, a); }
Jet atan(const Jet& a) { return jet_apply(JetFn::Atan, a); }
Jet abs_smooth(const Jet& a) { return jet_apply(JetFn::AbsSmooth, a); }

}  // namespace tractorlab
