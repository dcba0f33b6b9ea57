#include <cmath>
#include <stdexcept>

#include "imia/attacks.hpp"

namespace imia {

namespace {

// 1-D orthonormal DCT scale: a(N,0) = sqrt(1/N), a(N,k>0) = sqrt(2/N).
double dct_scale(size_t n, size_t k) {
    return k == 0 ? std::sqrt(1.0 / double(n)) : std::sqrt(2.0 / double(n));
}

} // namespace

Tensor dct_basis_step(size_t index, size_t freq_dims,
                      const std::vector<size_t>& image_shape) {
    size_t channels, height, width;
    if (image_shape.size() == 2) {
        channels = 1;
        height = image_shape[0];
        width = image_shape[1];
    } else if (image_shape.size() == 3) {
        channels = image_shape[0];
        height = image_shape[1];
        width = image_shape[2];
    } else {
        throw std::invalid_argument("dct basis needs a (H,W) or (C,H,W) shape, got " +
                                    shape_to_string(image_shape));
    }
    if (freq_dims == 0 || freq_dims > height || freq_dims > width) {
        throw std::invalid_argument("freq_dims must be in [1, min(H,W)]");
    }
    const size_t per_channel = freq_dims * freq_dims;
    if (index >= channels * per_channel) {
        throw std::out_of_range("dct basis index " + std::to_string(index) +
                                " out of range (" + std::to_string(channels * per_channel) +
                                " directions)");
    }

    const size_t ch = index / per_channel;
    const size_t u = (index % per_channel) / freq_dims;
    const size_t v = (index % per_channel) % freq_dims;

    Tensor out(image_shape);
    const double au = dct_scale(height, u);
    const double av = dct_scale(width, v);
    for (size_t x = 0; x < height; ++x) {
        const double cx = std::cos(M_PI * (2.0 * double(x) + 1.0) * double(u) /
                                   (2.0 * double(height)));
        for (size_t y = 0; y < width; ++y) {
            const double cy = std::cos(M_PI * (2.0 * double(y) + 1.0) * double(v) /
                                       (2.0 * double(width)));
            out[(ch * height + x) * width + y] = static_cast<float>(au * cx * av * cy);
        }
    }
    return out;
}

} // namespace imia
