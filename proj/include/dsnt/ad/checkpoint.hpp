#pragma once

#include <filesystem>
#include <string>

#include "dsnt/ad/tape.hpp"

namespace dsnt::ad {

/// Binary tensor container: the magic "DSNT1" followed by one entry per
/// tensor until end of file. Entry layout, all little-endian:
///
///   u32 name length, name bytes (UTF-8)
///   u8  dtype (1 = f32)
///   u32 rank, then rank x u64 dims
///   row-major f32 payload
std::string encode_tensors(const ParameterSet& params);
ParameterSet decode_tensors(const std::string& bytes);

void write_tensors(const std::filesystem::path& path, const ParameterSet& params);
ParameterSet read_tensors(const std::filesystem::path& path);

/// Rounds every value through float32, i.e. what a checkpoint round trip yields.
void round_to_f32(ParameterSet& params);

}  // namespace dsnt::ad
