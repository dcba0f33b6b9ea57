#ifndef IMIA_DATASET_HPP
#define IMIA_DATASET_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "imia/tensor.hpp"

namespace imia {

/// Labeled samples with a split tag. All tensors share one shape and every
/// label is < num_classes; validate() enforces both.
struct Dataset {
    std::vector<Tensor> inputs;
    std::vector<int> labels;
    size_t num_classes = 0;
    std::string split; // "train" or "test"

    size_t size() const { return inputs.size(); }
    void validate() const;
};

/// IDX loader (MNIST distribution format): big-endian headers, magic
/// 0x00000803 for images and 0x00000801 for labels. Pixels are scaled to
/// [0,1]; image tensors have shape {1, rows, cols}.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// CSV with a header row; one sample per row. Feature cells must be numeric,
/// the label cell a nonnegative integer.
Dataset load_csv(const std::string& path, const std::vector<std::string>& feature_cols,
                 const std::string& label_col);

struct BlobsSpec {
    size_t classes = 2;
    size_t per_class = 2; // per class, per split
    size_t dim = 2;
    double spread = 0.1;
    double label_noise = 0.0; // fraction of train labels flipped to a random other class
    uint64_t seed = 0;
};

/// Gaussian clusters around seeded random centers in [0.2, 0.8]^dim, values
/// clamped to [0,1]. Returns disjoint (train, test) halves; deterministic
/// per seed. Label noise applies to the train half only.
std::pair<Dataset, Dataset> synth_blobs(const BlobsSpec& spec);

} // namespace imia

#endif
