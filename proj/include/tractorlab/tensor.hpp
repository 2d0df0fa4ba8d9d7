#pragma once

#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "tractorlab/jet.hpp"

namespace tractorlab {

using Point = std::vector<double>;

// Dense array of jets with an arbitrary shape, row-major.
class JetArray {
public:
    JetArray() = default;
    JetArray(std::vector<int> shape, const Jet& fill);
    static JetArray zeros(std::vector<int> shape, int jet_dim, int order);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    size_t size() const { return c_.size(); }
    int order() const;
    int jet_dim() const { return c_.empty() ? 0 : c_[0].dim(); }

    Jet& operator[](size_t k) { return c_[k]; }
    const Jet& operator[](size_t k) const { return c_[k]; }

    template <class... I>
    Jet& operator()(I... idx) { return c_[flat({static_cast<int>(idx)...})]; }
    template <class... I>
    const Jet& operator()(I... idx) const { return c_[flat({static_cast<int>(idx)...})]; }

    Jet& at(const std::vector<int>& idx) { return c_[flat(idx)]; }
    const Jet& at(const std::vector<int>& idx) const { return c_[flat(idx)]; }

    size_t flat(std::initializer_list<int> idx) const;
    size_t flat(const std::vector<int>& idx) const;
    std::vector<int> unflat(size_t k) const;

    JetArray truncated(int order) const;
    // (d T)_{a ...} = d_a T_{...}: derivative index prepended.
    JetArray gradient() const;
    std::vector<double> values() const;
    double max_abs_value() const;

    JetArray& operator+=(const JetArray& o);
    JetArray& operator-=(const JetArray& o);
    JetArray& operator*=(double s);

private:
    std::vector<int> shape_;
    std::vector<Jet> c_;
};

JetArray operator+(JetArray a, const JetArray& b);
JetArray operator-(JetArray a, const JetArray& b);
JetArray operator*(JetArray a, double s);
JetArray operator*(const Jet& s, const JetArray& a);

// Permute indices: result index i is source index perm[i].
JetArray permute(const JetArray& a, const std::vector<int>& perm);

// Square matrix helpers on rank-2 arrays.
JetArray mat_inverse(const JetArray& m);
Jet mat_det(const JetArray& m);
JetArray mat_mul(const JetArray& a, const JetArray& b);
JetArray mat_transpose(const JetArray& a);

// Plain double tensors for boundary-level linear algebra.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s, double fill = 0.0);
    template <class... I>
    double& operator()(I... idx) { return v[flat({static_cast<int>(idx)...})]; }
    template <class... I>
    double operator()(I... idx) const { return v[flat({static_cast<int>(idx)...})]; }
    size_t flat(std::initializer_list<int> idx) const;
    double max_abs() const;
};

Tensor values_of(const JetArray& a);

enum class IndexKind { Up, Down };

// Tensor field on the chart with projective weight; evaluator returns jets of
// the requested order at a point.
struct TensorField {
    std::string name;
    std::vector<IndexKind> indices;
    double weight = 0.0;
    bool symmetric = false;  // symmetric in its last two indices
    std::function<JetArray(const Point&, int)> eval;

    JetArray operator()(const Point& p, int order) const { return eval(p, order); }
};

}  // namespace tractorlab
