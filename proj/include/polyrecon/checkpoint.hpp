#pragma once

#include "polyrecon/optim.hpp"

#include <map>
#include <string>

namespace polyrecon::nn {

// Checkpoint container: magic "PGNN", format version u32, tensor count u32;
// per tensor: name length u16 + name bytes, dtype u8 (0 = f32, 1 = f64),
// rank u8, dims u32[], row-major little-endian payload. Round trips are
// bit-exact.
//
// A parameter store is written as tensors "p/<name>", "m/<name>", "v/<name>",
// "s/<name>" (value, Adam moments, step count); metadata scalars are written
// as "meta/<key>".
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <class S>
void save_checkpoint(const std::string& path, const ParameterStore<S>& store,
                     const std::map<std::string, double>& meta);

template <class S>
void load_checkpoint(const std::string& path, ParameterStore<S>& store,
                     std::map<std::string, double>& meta);

}  // namespace polyrecon::nn
