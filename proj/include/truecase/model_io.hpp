#pragma once

#include <cstdint>
#include <string>

#include "truecase/model.hpp"

namespace truecase {

inline constexpr char kModelMagic[4] = {'H', 'T', 'R', 'C'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

// Layout, all integers 32-bit little-endian:
//   "HTRC" | version | len | config JSON (UTF-8) | tensor count |
//   per tensor: len | name | rank | dims... | float32 data (row-major)
// Loading requires exactly the tensors the config implies, in order, and
// rejects trailing bytes.
std::string serialize_model(const Model& model);
Model deserialize_model(const std::string& bytes);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace truecase
