// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0
//
// Checkpoint layout (all integers u32 little-endian, all floats f32
// little-endian):
//   magic "WKNT", version,
//   architecture: input_dim, initial_filter_size, num_blocks,
//     block_filter_size, cycle_len, cycle entries..., conv_channels,
//     residual_channels, skip_channels, head_hidden, num_classes, gating,
//   feature normalization: dim, mean[dim], stddev[dim],
//   weight tensors in declaration order, each as ndim, dims..., data.
// Round-trips are bit-exact.

#pragma once

#include <iosfwd>
#include <string>

#include "wknet/network.hpp"

namespace wknet {

inline constexpr char kCheckpointMagic[4] = {'W', 'K', 'N', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    Architecture arch;
    FeatureNorm norm;
    ModelParams params;
};

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace wknet
