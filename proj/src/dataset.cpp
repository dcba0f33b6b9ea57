#include "imia/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "imia/errors.hpp"
#include "imia/rng.hpp"

namespace imia {

void Dataset::validate() const {
    if (inputs.size() != labels.size()) {
        throw FormatError("dataset has " + std::to_string(inputs.size()) + " inputs but " +
                          std::to_string(labels.size()) + " labels");
    }
    if (num_classes < 2) throw FormatError("dataset needs at least 2 classes");
    for (size_t i = 0; i < inputs.size(); ++i) {
        if (!inputs[i].same_shape(inputs[0])) {
            throw FormatError("dataset tensors disagree on shape at sample " +
                              std::to_string(i));
        }
        if (labels[i] < 0 || static_cast<size_t>(labels[i]) >= num_classes) {
            throw FormatError("label out of range at sample " + std::to_string(i));
        }
    }
}

namespace {

uint32_t read_be32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("truncated file while reading " + what);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) |
           uint32_t(b[3]);
}

constexpr uint32_t kIdxImagesMagic = 0x00000803;
constexpr uint32_t kIdxLabelsMagic = 0x00000801;

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw IoError("cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw IoError("cannot open " + labels_path);

    if (read_be32(img, "image magic") != kIdxImagesMagic) {
        throw FormatError(images_path + ": bad IDX image magic");
    }
    const uint32_t n_images = read_be32(img, "image count");
    const uint32_t rows = read_be32(img, "row count");
    const uint32_t cols = read_be32(img, "column count");

    if (read_be32(lab, "label magic") != kIdxLabelsMagic) {
        throw FormatError(labels_path + ": bad IDX label magic");
    }
    const uint32_t n_labels = read_be32(lab, "label count");
    if (n_images != n_labels) {
        throw FormatError("IDX image/label counts differ: " + std::to_string(n_images) +
                          " vs " + std::to_string(n_labels));
    }
    if (rows == 0 || cols == 0) throw FormatError(images_path + ": zero image dimension");

    Dataset ds;
    ds.split = "train";
    const size_t pixels = size_t(rows) * size_t(cols);
    std::vector<unsigned char> buf(pixels);
    int max_label = 1;
    for (uint32_t i = 0; i < n_images; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), std::streamsize(pixels));
        if (!img) throw FormatError(images_path + ": truncated image data");
        Tensor t({1, rows, cols});
        for (size_t p = 0; p < pixels; ++p) {
            t[p] = float(buf[p]) / 255.0f;
        }
        char lbl = 0;
        lab.read(&lbl, 1);
        if (!lab) throw FormatError(labels_path + ": truncated label data");
        ds.inputs.push_back(std::move(t));
        ds.labels.push_back(int(static_cast<unsigned char>(lbl)));
        max_label = std::max(max_label, ds.labels.back());
    }
    ds.num_classes = size_t(max_label) + 1;
    if (ds.num_classes < 2) ds.num_classes = 2;
    ds.validate();
    return ds;
}

Dataset load_csv(const std::string& path, const std::vector<std::string>& feature_cols,
                 const std::string& label_col) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    auto column_index = [&](const std::string& name) -> size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw FormatError(path + ": missing column '" + name + "'");
        }
        return size_t(it - header.begin());
    };
    std::vector<size_t> feat_idx;
    for (const std::string& c : feature_cols) feat_idx.push_back(column_index(c));
    const size_t label_idx = column_index(label_col);
    if (feat_idx.empty()) throw FormatError(path + ": no feature columns requested");

    Dataset ds;
    ds.split = "train";
    int max_label = 1;
    size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        {
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (!line.empty() && line.back() == ',') cells.push_back("");
        }
        if (cells.size() != header.size()) {
            throw FormatError(path + ": row " + std::to_string(row_no) + " has " +
                              std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(header.size()));
        }
        auto parse_double = [&](const std::string& cell) {
            try {
                size_t pos = 0;
                const double v = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument("trailing garbage");
                return v;
            } catch (const std::exception&) {
                throw FormatError(path + ": non-numeric cell '" + cell + "' at row " +
                                  std::to_string(row_no));
            }
        };
        std::vector<float> feats;
        feats.reserve(feat_idx.size());
        for (size_t fi : feat_idx) feats.push_back(float(parse_double(cells[fi])));
        const double lv = parse_double(cells[label_idx]);
        const int label = int(lv);
        if (double(label) != lv || label < 0) {
            throw FormatError(path + ": label must be a nonnegative integer at row " +
                              std::to_string(row_no));
        }
        ds.inputs.push_back(Tensor::from_vector(std::move(feats)));
        ds.labels.push_back(label);
        max_label = std::max(max_label, label);
    }
    if (ds.inputs.empty()) throw FormatError(path + ": no data rows");
    ds.num_classes = size_t(max_label) + 1;
    if (ds.num_classes < 2) ds.num_classes = 2;
    ds.validate();
    return ds;
}

std::pair<Dataset, Dataset> synth_blobs(const BlobsSpec& spec) {
    if (spec.classes < 2) throw std::invalid_argument("synth_blobs needs >= 2 classes");
    if (spec.per_class < 2) throw std::invalid_argument("synth_blobs needs >= 2 per class");
    if (spec.dim == 0) throw std::invalid_argument("synth_blobs needs dim >= 1");
    if (spec.label_noise < 0.0 || spec.label_noise >= 1.0) {
        throw std::invalid_argument("label_noise must be in [0, 1)");
    }

    RandomStream rng(spec.seed);
    std::vector<std::vector<double>> centers(spec.classes, std::vector<double>(spec.dim));
    for (auto& c : centers) {
        for (double& x : c) x = rng.uniform(0.2, 0.8);
    }

    auto draw_sample = [&](size_t cls) {
        Tensor t({spec.dim});
        for (size_t j = 0; j < spec.dim; ++j) {
            double v = centers[cls][j] + spec.spread * rng.normal();
            t[j] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
        return t;
    };

    Dataset train, test;
    train.split = "train";
    test.split = "test";
    train.num_classes = test.num_classes = spec.classes;
    for (size_t cls = 0; cls < spec.classes; ++cls) {
        for (size_t i = 0; i < spec.per_class; ++i) {
            train.inputs.push_back(draw_sample(cls));
            train.labels.push_back(int(cls));
        }
        for (size_t i = 0; i < spec.per_class; ++i) {
            test.inputs.push_back(draw_sample(cls));
            test.labels.push_back(int(cls));
        }
    }
    if (spec.label_noise > 0.0) {
        for (size_t i = 0; i < train.size(); ++i) {
            if (rng.uniform() < spec.label_noise) {
                const int shift = 1 + int(rng.below(spec.classes - 1));
                train.labels[i] = (train.labels[i] + shift) % int(spec.classes);
            }
        }
    }
    train.validate();
    test.validate();
    return {std::move(train), std::move(test)};
}

} // namespace imia
