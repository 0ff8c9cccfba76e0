#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace sift {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_hex(const std::vector<double>& v);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace sift
