#include "amf/binary_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

#include "amf/errors.hpp"

namespace amf {

namespace {

constexpr int kFeatureVersion = 1;

void append_le(std::string& out, Real value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

Real read_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<Real>(bits);
}

}  // namespace

void write_headered_file(const std::filesystem::path& path, std::string_view magic,
                         const Json& header, std::span<const Real> payload) {
  std::string bytes;
  bytes.reserve(payload.size() * 8 + 256);
  bytes.append(magic).push_back('\n');
  bytes.append(header.dump()).push_back('\n');
  for (Real x : payload) append_le(bytes, x);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

HeaderedFile read_headered_file(const std::filesystem::path& path, std::string_view magic,
                                const std::function<std::size_t(const Json&)>& payload_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("file not found: '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const std::size_t magic_end = bytes.find('\n');
  if (magic_end == std::string::npos || std::string_view(bytes).substr(0, magic_end) != magic) {
    throw MalformedFile("'" + path.string() + "' is not a " + std::string(magic) + " file");
  }
  const std::size_t header_end = bytes.find('\n', magic_end + 1);
  if (header_end == std::string::npos) {
    throw MalformedFile("'" + path.string() + "': header line is not terminated");
  }
  HeaderedFile file;
  try {
    file.header = Json::parse(bytes.substr(magic_end + 1, header_end - magic_end - 1));
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile("'" + path.string() + "': bad header: " + e.what());
  }
  const std::size_t expected = payload_size(file.header);
  const std::size_t available = bytes.size() - header_end - 1;
  if (available != expected * 8) {
    throw MalformedFile("'" + path.string() + "': payload has " + std::to_string(available) +
                        " bytes, header implies " + std::to_string(expected * 8));
  }
  file.payload.resize(expected);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + header_end + 1);
  for (std::size_t i = 0; i < expected; ++i) file.payload[i] = read_le(p + 8 * i);
  return file;
}

namespace {

Shape header_shape(const Json& header, const std::string& where) {
  if (!header.is_object() || !header.contains("shape") || !header["shape"].is_array()) {
    throw MalformedFile(where + ": header lacks a shape");
  }
  Shape shape;
  for (const auto& e : header["shape"]) {
    if (!e.is_number_unsigned()) throw MalformedFile(where + ": shape extents must be integers");
    shape.push_back(e.get<std::size_t>());
  }
  return shape;
}

}  // namespace

void write_feature_file(const std::filesystem::path& path, const Tensor& tensor) {
  Json header;
  header["version"] = kFeatureVersion;
  header["dtype"] = "f64";
  header["endian"] = "little";
  header["shape"] = tensor.shape();
  write_headered_file(path, "AMFFEAT", header, tensor.data());
}

Tensor read_feature_file(const std::filesystem::path& path) {
  const std::string where = "'" + path.string() + "'";
  HeaderedFile file = read_headered_file(path, "AMFFEAT", [&](const Json& h) {
    if (!h.is_object() || h.value("version", -1) != kFeatureVersion) {
      throw UnknownVersion(where + ": unsupported feature file version");
    }
    if (h.value("dtype", "") != "f64" || h.value("endian", "") != "little") {
      throw MalformedFile(where + ": only little-endian f64 payloads are supported");
    }
    return shape_size(header_shape(h, where));
  });
  return Tensor(header_shape(file.header, where), std::move(file.payload));
}

}  // namespace amf
