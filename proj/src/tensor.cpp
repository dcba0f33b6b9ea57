#include "imia/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace imia {

size_t shape_numel(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
}

std::string shape_to_string(const std::vector<size_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

Tensor::Tensor(std::vector<size_t> shape)
    : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0f) {
    for (size_t d : shape_) {
        if (d == 0) throw std::invalid_argument("tensor dimension must be positive");
    }
}

Tensor::Tensor(std::vector<size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_numel(shape_) != data_.size()) {
        throw std::invalid_argument("tensor shape " + shape_to_string(shape_) +
                                    " does not match " + std::to_string(data_.size()) +
                                    " values");
    }
}

Tensor Tensor::from_vector(std::vector<float> v) {
    std::vector<size_t> shape{v.size()};
    return Tensor(std::move(shape), std::move(v));
}

bool Tensor::all_finite() const {
    for (float x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

void Tensor::require_finite(const std::string& what) const {
    if (!all_finite()) {
        throw std::invalid_argument(what + " contains non-finite values");
    }
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

void axpy(Tensor& y, float a, const Tensor& x) {
    if (!y.same_shape(x)) {
        throw std::invalid_argument("axpy: shape mismatch " + y.shape_str() + " vs " +
                                    x.shape_str());
    }
    for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void clamp_inplace(Tensor& t, float lo, float hi) {
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo) t[i] = lo;
        if (t[i] > hi) t[i] = hi;
    }
}

void clamp_box_inplace(Tensor& t, const Tensor& lo, const Tensor& hi) {
    if (!t.same_shape(lo) || !t.same_shape(hi)) {
        throw std::invalid_argument("clamp_box: shape mismatch");
    }
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo[i]) t[i] = lo[i];
        if (t[i] > hi[i]) t[i] = hi[i];
    }
}

double l2_distance(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("l2_distance: shape mismatch");
    }
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

double linf_distance(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("linf_distance: shape mismatch");
    }
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
        if (d > m) m = d;
    }
    return m;
}

double l2_norm(const Tensor& t) {
    double acc = 0.0;
    for (size_t i = 0; i < t.size(); ++i) {
        acc += static_cast<double>(t[i]) * static_cast<double>(t[i]);
    }
    return std::sqrt(acc);
}

double dot(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("dot: shape mismatch");
    }
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

} // namespace imia
