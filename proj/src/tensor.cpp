#include "tractorlab/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "tractorlab/errors.hpp"

namespace tractorlab {

namespace {

size_t volume(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) n *= static_cast<size_t>(d);
    return n;
}

}  // namespace

JetArray::JetArray(std::vector<int> shape, const Jet& fill) : shape_(std::move(shape)), c_(volume(shape_), fill) {}

JetArray JetArray::zeros(std::vector<int> shape, int jet_dim, int order) {
    return JetArray(std::move(shape), Jet::zero(jet_dim, order));
}

int JetArray::order() const {
    int o = c_.empty() ? -1 : c_[0].order();
    for (const auto& j : c_) o = std::min(o, j.order());
    return o;
}

size_t JetArray::flat(std::initializer_list<int> idx) const {
    if (idx.size() != shape_.size()) throw IndexError("wrong number of indices");
    size_t k = 0;
    size_t r = 0;
    for (int i : idx) {
        if (i < 0 || i >= shape_[r]) throw IndexError("index out of range");
        k = k * shape_[r] + i;
        ++r;
    }
    return k;
}

size_t JetArray::flat(const std::vector<int>& idx) const {
    if (idx.size() != shape_.size()) throw IndexError("wrong number of indices");
    size_t k = 0;
    for (size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] < 0 || idx[r] >= shape_[r]) throw IndexError("index out of range");
        k = k * shape_[r] + idx[r];
    }
    return k;
}

std::vector<int> JetArray::unflat(size_t k) const {
    std::vector<int> idx(shape_.size());
    for (int r = static_cast<int>(shape_.size()) - 1; r >= 0; --r) {
        idx[r] = static_cast<int>(k % shape_[r]);
        k /= shape_[r];
    }
    return idx;
}

JetArray JetArray::truncated(int order) const {
    JetArray r = *this;
    for (auto& j : r.c_)
        if (j.order() > order) j = j.truncated(order);
    return r;
}

JetArray JetArray::gradient() const {
    int d = jet_dim();
    std::vector<int> s{d};
    s.insert(s.end(), shape_.begin(), shape_.end());
    JetArray r;
    r.shape_ = std::move(s);
    r.c_.reserve(d * c_.size());
    for (int a = 0; a < d; ++a)
        for (const auto& j : c_) r.c_.push_back(j.partial(a));
    return r;
}

std::vector<double> JetArray::values() const {
    std::vector<double> v(c_.size());
    for (size_t k = 0; k < c_.size(); ++k) v[k] = c_[k].value();
    return v;
}

double JetArray::max_abs_value() const {
    double m = 0.0;
    for (const auto& j : c_) m = std::max(m, std::abs(j.value()));
    return m;
}

JetArray& JetArray::operator+=(const JetArray& o) {
    if (o.shape_ != shape_) throw IndexError("shape mismatch in tensor sum");
    for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

JetArray& JetArray::operator-=(const JetArray& o) {
    if (o.shape_ != shape_) throw IndexError("shape mismatch in tensor difference");
    for (size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

JetArray& JetArray::operator*=(double s) {
    for (auto& j : c_) j *= s;
    return *this;
}

JetArray operator+(JetArray a, const JetArray& b) { return a += b; }
JetArray operator-(JetArray a, const JetArray& b) { return a -= b; }
JetArray operator*(JetArray a, double s) { return a *= s; }
JetArray operator*(const Jet& s, const JetArray& a) {
    JetArray r = a;
    for (size_t k = 0; k < r.size(); ++k) r[k] = s * a[k];
    return r;
}

JetArray permute(const JetArray& a, const std::vector<int>& perm) {
    std::vector<int> s(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) s[i] = a.shape()[perm[i]];
    JetArray r(s, a[0]);
    std::vector<int> src(perm.size());
    for (size_t k = 0; k < r.size(); ++k) {
        auto idx = r.unflat(k);
        for (size_t i = 0; i < perm.size(); ++i) src[perm[i]] = idx[i];
        r[k] = a.at(src);
    }
    return r;
}

JetArray mat_mul(const JetArray& a, const JetArray& b) {
    int n = a.shape()[0], m = a.shape()[1], p = b.shape()[1];
    if (b.shape()[0] != m) throw IndexError("matrix shape mismatch");
    JetArray r = JetArray::zeros({n, p}, a.jet_dim(), std::min(a.order(), b.order()));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < p; ++j) r(i, j) += a(i, k) * b(k, j);
    return r;
}

JetArray mat_transpose(const JetArray& a) { return permute(a, {1, 0}); }

// Gauss-Jordan elimination with pivoting on constant terms.
JetArray mat_inverse(const JetArray& m) {
    int n = m.shape()[0];
    if (m.rank() != 2 || m.shape()[1] != n) throw IndexError("inverse of a non-square array");
    int order = m.order();
    JetArray a = m.truncated(order);
    JetArray inv = JetArray::zeros({n, n}, m.jet_dim(), order);
    for (int i = 0; i < n; ++i) inv(i, i) += 1.0;
    double scale = a.max_abs_value();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col).value()) > std::abs(a(piv, col).value())) piv = r;
        if (std::abs(a(piv, col).value()) <= 1e-300 || std::abs(a(piv, col).value()) <= 1e-14 * scale)
            throw PoleError("singular matrix in jet inversion");
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(a(col, j), a(piv, j));
                std::swap(inv(col, j), inv(piv, j));
            }
        Jet r = a(col, col).reciprocal();
        for (int j = 0; j < n; ++j) {
            a(col, j) = a(col, j) * r;
            inv(col, j) = inv(col, j) * r;
        }
        for (int i = 0; i < n; ++i) {
            if (i == col) continue;
            Jet f = a(i, col);
            for (int j = 0; j < n; ++j) {
                a(i, j) -= f * a(col, j);
                inv(i, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

Jet mat_det(const JetArray& m) {
    int n = m.shape()[0];
    JetArray a = m.truncated(m.order());
    Jet det = Jet::constant(m.jet_dim(), a.order(), 1.0);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col).value()) > std::abs(a(piv, col).value())) piv = r;
        if (a(piv, col).value() == 0.0) return Jet::zero(m.jet_dim(), a.order());
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            det = -det;
        }
        det = det * a(col, col);
        Jet r = a(col, col).reciprocal();
        for (int i = col + 1; i < n; ++i) {
            Jet f = a(i, col) * r;
            for (int j = col; j < n; ++j) a(i, j) -= f * a(col, j);
        }
    }
    return det;
}

Tensor::Tensor(std::vector<int> s, double fill) : shape(std::move(s)), v(volume(shape), fill) {}

size_t Tensor::flat(std::initializer_list<int> idx) const {
    if (idx.size() != shape.size()) throw IndexError("wrong number of indices");
    size_t k = 0;
    size_t r = 0;
    for (int i : idx) {
        if (i < 0 || i >= shape[r]) throw IndexError("index out of range");
        k = k * shape[r] + i;
        ++r;
    }
    return k;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Tensor values_of(const JetArray& a) {
    Tensor t(a.shape());
    t.v = a.values();
    return t;
}

}  // namespace tractorlab
