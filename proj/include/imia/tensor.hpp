#ifndef IMIA_TENSOR_HPP
#define IMIA_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace imia {

/// Shape-tagged dense array of 32-bit floats, row-major. Carrier for model
/// inputs, activations, gradients and adversarial perturbations.
class Tensor {
public:
    Tensor() = default;

    // Zero-filled.
    explicit Tensor(std::vector<size_t> shape);

    // Takes ownership of data; product(shape) must equal data.size().
    Tensor(std::vector<size_t> shape, std::vector<float> data);

    static Tensor from_vector(std::vector<float> v);

    const std::vector<size_t>& shape() const { return shape_; }
    size_t rank() const { return shape_.size(); }
    size_t size() const { return data_.size(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    float& operator[](size_t i) { return data_[i]; }
    float operator[](size_t i) const { return data_[i]; }

    const std::vector<float>& values() const { return data_; }

    bool all_finite() const;
    // Throws std::invalid_argument naming `what` if any value is NaN/Inf.
    void require_finite(const std::string& what) const;

    std::string shape_str() const;

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    std::vector<size_t> shape_;
    std::vector<float> data_;
};

size_t shape_numel(const std::vector<size_t>& shape);
std::string shape_to_string(const std::vector<size_t>& shape);

// y += a * x; shapes must match.
void axpy(Tensor& y, float a, const Tensor& x);
void clamp_inplace(Tensor& t, float lo, float hi);
// Per-element clamp of t into [lo_i, hi_i] taken from two reference tensors.
void clamp_box_inplace(Tensor& t, const Tensor& lo, const Tensor& hi);

// Accumulated in double.
double l2_distance(const Tensor& a, const Tensor& b);
double linf_distance(const Tensor& a, const Tensor& b);
double l2_norm(const Tensor& t);
double dot(const Tensor& a, const Tensor& b);

} // namespace imia

#endif
