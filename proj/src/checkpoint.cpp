#include "imia/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "imia/errors.hpp"

namespace imia {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json layer_to_json(const LayerSpec& l) {
    json j;
    j["kind"] = layer_kind_name(l.kind);
    switch (l.kind) {
    case LayerKind::Dense:
        j["in"] = l.in_width;
        j["out"] = l.out_width;
        break;
    case LayerKind::Conv2d:
        j["in_channels"] = l.in_channels;
        j["out_channels"] = l.out_channels;
        j["kernel"] = l.kernel;
        j["stride"] = l.stride;
        break;
    case LayerKind::Relu:
    case LayerKind::Flatten:
        break;
    }
    return j;
}

LayerSpec layer_from_json(const json& j) {
    const LayerKind kind = layer_kind_from_name(j.at("kind").get<std::string>());
    switch (kind) {
    case LayerKind::Dense:
        return LayerSpec::dense(j.at("in").get<size_t>(), j.at("out").get<size_t>());
    case LayerKind::Conv2d:
        return LayerSpec::conv2d(j.at("in_channels").get<size_t>(),
                                 j.at("out_channels").get<size_t>(),
                                 j.at("kernel").get<size_t>(),
                                 j.value("stride", size_t{1}));
    case LayerKind::Relu:
        return LayerSpec::relu();
    case LayerKind::Flatten:
        return LayerSpec::flatten();
    }
    throw FormatError("unreachable layer kind");
}

void write_le_f32(std::ostream& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    const unsigned char b[4] = {
        static_cast<unsigned char>(bits & 0xff),
        static_cast<unsigned char>((bits >> 8) & 0xff),
        static_cast<unsigned char>((bits >> 16) & 0xff),
        static_cast<unsigned char>((bits >> 24) & 0xff),
    };
    out.write(reinterpret_cast<const char*>(b), 4);
}

float read_le_f32(const unsigned char* b) {
    const uint32_t bits = uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) |
                          (uint32_t(b[3]) << 24);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

void save_checkpoint(const Network& net, const std::string& path,
                     const std::string& train_digest) {
    const std::string blob_path = path + ".bin";

    size_t total = 0;
    for (const Tensor& p : net.parameters()) total += p.size();

    nlohmann::json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["kind"] = "imia-checkpoint";
    manifest["classes"] = net.spec().num_classes;
    manifest["input_shape"] = net.spec().input_shape;
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerSpec& l : net.spec().layers) layers.push_back(layer_to_json(l));
    manifest["layers"] = layers;
    manifest["seed"] = net.init_seed();
    manifest["train_digest"] = train_digest;
    manifest["blob"] = blob_path.substr(blob_path.find_last_of('/') + 1);
    manifest["blob_bytes"] = total * 4;

    {
        std::ofstream blob(blob_path, std::ios::binary | std::ios::trunc);
        if (!blob) throw IoError("cannot write " + blob_path);
        for (const Tensor& p : net.parameters()) {
            for (size_t i = 0; i < p.size(); ++i) write_le_f32(blob, p[i]);
        }
        if (!blob) throw IoError("failed writing " + blob_path);
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path);
}

Network load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": invalid manifest JSON: " + e.what());
    }

    NetworkSpec spec;
    try {
        if (manifest.at("kind").get<std::string>() != "imia-checkpoint") {
            throw FormatError(path + ": not a checkpoint manifest");
        }
        if (manifest.at("format_version").get<int>() != kFormatVersion) {
            throw FormatError(path + ": unsupported checkpoint format version");
        }
        spec.num_classes = manifest.at("classes").get<size_t>();
        spec.input_shape = manifest.at("input_shape").get<std::vector<size_t>>();
        for (const auto& lj : manifest.at("layers")) {
            spec.layers.push_back(layer_from_json(lj));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": bad manifest: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(path + ": bad manifest: " + e.what());
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(path + ": invalid architecture: " + e.what());
    }

    const std::string dir =
        path.find_last_of('/') == std::string::npos ? "" : path.substr(0, path.find_last_of('/') + 1);
    const std::string blob_path = dir + manifest.at("blob").get<std::string>();
    std::ifstream blob(blob_path, std::ios::binary);
    if (!blob) throw IoError("cannot open " + blob_path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(blob)),
                                     std::istreambuf_iterator<char>());

    size_t total = 0;
    for (const LayerSpec& l : spec.layers) {
        if (l.kind == LayerKind::Dense) {
            total += l.in_width * l.out_width + l.out_width;
        } else if (l.kind == LayerKind::Conv2d) {
            total += l.out_channels * l.in_channels * l.kernel * l.kernel + l.out_channels;
        }
    }
    const size_t declared = manifest.at("blob_bytes").get<size_t>();
    if (bytes.size() != total * 4 || declared != total * 4) {
        throw FormatError(blob_path + ": weight blob holds " + std::to_string(bytes.size()) +
                          " bytes, architecture needs " + std::to_string(total * 4));
    }

    std::vector<Tensor> params;
    size_t off = 0;
    auto take = [&](std::vector<size_t> shape) {
        Tensor t(std::move(shape));
        for (size_t i = 0; i < t.size(); ++i, off += 4) {
            t[i] = read_le_f32(bytes.data() + off);
        }
        params.push_back(std::move(t));
    };
    for (const LayerSpec& l : spec.layers) {
        if (l.kind == LayerKind::Dense) {
            take({l.out_width, l.in_width});
            take({l.out_width});
        } else if (l.kind == LayerKind::Conv2d) {
            take({l.out_channels, l.in_channels, l.kernel, l.kernel});
            take({l.out_channels});
        }
    }
    return Network(std::move(spec), std::move(params));
}

} // namespace imia
