#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "amf/json_config.hpp"
#include "amf/tensor.hpp"

namespace amf {

/// Container layout shared by feature files and checkpoints:
///   <magic>\n
///   <one-line JSON header>\n
///   little-endian float64 payload
struct HeaderedFile {
  Json header;
  std::vector<Real> payload;
};

void write_headered_file(const std::filesystem::path& path, std::string_view magic,
                         const Json& header, std::span<const Real> payload);
/// Throws MissingFile, MalformedFile (bad magic, truncated or oversized payload).
/// `payload_size` maps the parsed header to the expected number of values.
HeaderedFile read_headered_file(const std::filesystem::path& path, std::string_view magic,
                                const std::function<std::size_t(const Json&)>& payload_size);

/// Feature file: header {"version":1,"dtype":"f64","endian":"little","shape":[...]}.
void write_feature_file(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_feature_file(const std::filesystem::path& path);

}  // namespace amf
