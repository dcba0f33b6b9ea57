#ifndef IMIA_CHECKPOINT_HPP
#define IMIA_CHECKPOINT_HPP

#include <string>

#include "imia/net.hpp"

namespace imia {

/// Persists a network as a JSON manifest at `path` plus a flat little-endian
/// float32 weight blob at `path` + ".bin". The round trip is bit-exact:
/// load_checkpoint(save_checkpoint(net)) reproduces forward outputs.
void save_checkpoint(const Network& net, const std::string& path,
                     const std::string& train_digest = "");

Network load_checkpoint(const std::string& path);

} // namespace imia

#endif
