#pragma once

#include <cstdint>
#include <string>

namespace torusflow {

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);
std::string checksum_hex(std::uint64_t value);

}  // namespace torusflow
