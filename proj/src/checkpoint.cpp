// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "wknet/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint i/o assumes a little-endian host");

namespace wknet {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f32(std::ostream& out, const float* data, std::size_t n) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw DataError("checkpoint truncated");
    return v;
}

void read_f32(std::istream& in, float* data, std::size_t n) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
    if (!in) throw DataError("checkpoint truncated");
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
    out.write(kCheckpointMagic, 4);
    write_u32(out, kCheckpointVersion);

    const Architecture& a = ckpt.arch;
    write_u32(out, static_cast<std::uint32_t>(a.input_dim));
    write_u32(out, static_cast<std::uint32_t>(a.initial_filter_size));
    write_u32(out, static_cast<std::uint32_t>(a.num_blocks));
    write_u32(out, static_cast<std::uint32_t>(a.block_filter_size));
    write_u32(out, static_cast<std::uint32_t>(a.dilation_cycle.size()));
    for (int d : a.dilation_cycle) write_u32(out, static_cast<std::uint32_t>(d));
    write_u32(out, static_cast<std::uint32_t>(a.conv_channels));
    write_u32(out, static_cast<std::uint32_t>(a.residual_channels));
    write_u32(out, static_cast<std::uint32_t>(a.skip_channels));
    write_u32(out, static_cast<std::uint32_t>(a.head_hidden));
    write_u32(out, static_cast<std::uint32_t>(a.num_classes));
    write_u32(out, a.gating_enabled ? 1u : 0u);

    write_u32(out, static_cast<std::uint32_t>(ckpt.norm.mean.size()));
    write_f32(out, ckpt.norm.mean.data(), ckpt.norm.mean.size());
    write_f32(out, ckpt.norm.stddev.data(), ckpt.norm.stddev.size());

    for (const auto& t : ckpt.params.tensors()) {
        write_u32(out, static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) write_u32(out, static_cast<std::uint32_t>(d));
        write_f32(out, t.data, t.size);
    }
    if (!out) throw DataError("checkpoint write failed");
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint for writing: " + path);
    save_checkpoint(ckpt, f);
}

Checkpoint load_checkpoint(std::istream& in) {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw DataError("not a wknet checkpoint (bad magic)");
    const std::uint32_t version = read_u32(in);
    if (version != kCheckpointVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version));

    Checkpoint ckpt;
    Architecture& a = ckpt.arch;
    a.input_dim = static_cast<int>(read_u32(in));
    a.initial_filter_size = static_cast<int>(read_u32(in));
    a.num_blocks = static_cast<int>(read_u32(in));
    a.block_filter_size = static_cast<int>(read_u32(in));
    const std::uint32_t cycle_len = read_u32(in);
    if (cycle_len == 0 || cycle_len > 64) throw DataError("corrupt dilation cycle length");
    a.dilation_cycle.resize(cycle_len);
    for (auto& d : a.dilation_cycle) d = static_cast<int>(read_u32(in));
    a.conv_channels = static_cast<int>(read_u32(in));
    a.residual_channels = static_cast<int>(read_u32(in));
    a.skip_channels = static_cast<int>(read_u32(in));
    a.head_hidden = static_cast<int>(read_u32(in));
    a.num_classes = static_cast<int>(read_u32(in));
    a.gating_enabled = read_u32(in) != 0;
    a.validate();

    const std::uint32_t norm_dim = read_u32(in);
    if (static_cast<int>(norm_dim) != a.input_dim)
        throw DataError("feature normalization dimension mismatch");
    ckpt.norm.mean.resize(norm_dim);
    ckpt.norm.stddev.resize(norm_dim);
    read_f32(in, ckpt.norm.mean.data(), norm_dim);
    read_f32(in, ckpt.norm.stddev.data(), norm_dim);

    ckpt.params = ModelParams::shaped(a);
    for (auto& t : ckpt.params.tensors()) {
        const std::uint32_t ndim = read_u32(in);
        if (ndim != t.shape.size())
            throw DataError("tensor " + t.name + ": unexpected rank");
        for (std::size_t i = 0; i < t.shape.size(); ++i) {
            if (read_u32(in) != static_cast<std::uint32_t>(t.shape[i]))
                throw DataError("tensor " + t.name + ": unexpected shape");
        }
        read_f32(in, t.data, t.size);
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw DataError("trailing bytes after checkpoint payload");
    return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint: " + path);
    return load_checkpoint(f);
}

}  // namespace wknet
