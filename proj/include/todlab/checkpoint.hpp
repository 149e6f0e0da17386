#pragma once

#include <filesystem>

#include "todlab/mlp.hpp"

namespace todlab {

struct Checkpoint {
    MLPSpec spec;
    ParamVector params;
};

// TODLAB-CKPT v1: one magic/version text line, one line of space-separated
// layer sizes, then the flat parameter vector as little-endian 64-bit reals.
// Writes are whole-file atomic; round-trips are bit-exact.
void save_checkpoint(const std::filesystem::path& path, const MLPSpec& spec,
                     const ParamVector& params);

// Throws format_error on a bad magic line, malformed sizes, or a payload
// whose length does not match the declared architecture.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace todlab
