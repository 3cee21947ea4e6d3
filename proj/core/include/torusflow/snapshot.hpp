#pragma once

#include <string>

#include "torusflow/spectral_field.hpp"

namespace torusflow {

/// Binary field snapshot.
///
/// Layout: 16-byte magic "TORUSFLOWFIELD01", little-endian u32 N,
/// u32 components, u8 flags (bit 0 = divergence-free), then one (re, im)
/// f64 pair per mode per component, modes row-major with k1 = -N..N outer
/// and k2 = -N..N inner. Round-trips bit-exactly.
void write_snapshot(const SpectralField& f, const std::string& path);
SpectralField read_snapshot(const std::string& path);

}  // namespace torusflow
