#include "sphmean/field_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "sphmean/error.hpp"

namespace sphmean {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path strip_stem(const fs::path& stem) {
  fs::path s = stem;
  if (s.extension() == ".json" || s.extension() == ".bin") s.replace_extension();
  return s;
}

std::vector<unsigned char> to_little_endian(std::span<const double> values) {
  std::vector<unsigned char> out(values.size() * sizeof(double));
  std::memcpy(out.data(), values.data(), out.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < out.size(); i += 8)
      std::reverse(out.begin() + static_cast<std::ptrdiff_t>(i),
                   out.begin() + static_cast<std::ptrdiff_t>(i + 8));
  }
  return out;
}

std::vector<double> from_little_endian(std::vector<unsigned char> bytes) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < bytes.size(); i += 8)
      std::reverse(bytes.begin() + static_cast<std::ptrdiff_t>(i),
                   bytes.begin() + static_cast<std::ptrdiff_t>(i + 8));
  }
  std::vector<double> out(bytes.size() / sizeof(double));
  std::memcpy(out.data(), bytes.data(), out.size() * sizeof(double));
  return out;
}

Parity parse_parity(const std::string& s) {
  if (s == "even") return Parity::Even;
  if (s == "none") return Parity::None;
  throw Error(ErrorCode::MalformedHeader, "unknown parity '" + s + "'");
}

template <typename T>
T header_get(const json& j, const char* key) {
  if (!j.contains(key))
    throw Error(ErrorCode::MalformedHeader, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

fs::path header_path(const fs::path& stem) {
  fs::path p = strip_stem(stem);
  p += ".json";
  return p;
}

fs::path payload_path(const fs::path& stem) {
  fs::path p = strip_stem(stem);
  p += ".bin";
  return p;
}

std::string sha256_hex(std::span<const unsigned char> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error(ErrorCode::Io, "sha256 computation failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

void write_field(const GridField& field, const fs::path& stem) {
  const auto bytes = to_little_endian(field.raw());
  const fs::path bin = payload_path(stem);
  const fs::path hdr = header_path(stem);
  if (bin.has_parent_path()) fs::create_directories(bin.parent_path());

  json axes = json::array();
  for (const auto& a : field.axes())
    axes.push_back({{"name", a.name},
                    {"origin", a.origin},
                    {"step", a.step},
                    {"count", a.count},
                    {"parity", std::string(to_string(a.parity))}});
  json header = {{"format", kFieldFormat},
                 {"version", kFieldFormatVersion},
                 {"dims", field.rank()},
                 {"axes", axes},
                 {"scalar", std::string(to_string(field.kind()))},
                 {"byte_order", "little-endian"},
                 {"payload", bin.filename().string()},
                 {"payload_sha256", sha256_hex(bytes)},
                 {"nonfinite", field.has_nonfinite()},
                 {"meta", field.meta()}};

  {
    std::ofstream out(bin, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + bin.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  std::ofstream out(hdr, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + hdr.string());
  out << header.dump(2) << '\n';
}

GridField read_field(const fs::path& stem) {
  const fs::path hdr = header_path(stem);
  const fs::path bin = payload_path(stem);
  std::ifstream in(hdr);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + hdr.string());
  json header;
  try {
    header = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, hdr.string() + ": " + e.what());
  }
  if (header.value("format", std::string()) != kFieldFormat)
    throw Error(ErrorCode::MalformedHeader, "not a " + std::string(kFieldFormat) + " header");
  if (header.value("byte_order", std::string()) != "little-endian")
    throw Error(ErrorCode::MalformedHeader, "unsupported byte order");

  const auto dims = header_get<std::size_t>(header, "dims");
  const auto& jaxes = header.at("axes");
  if (!jaxes.is_array() || jaxes.size() != dims)
    throw Error(ErrorCode::CountMismatch, "dims does not match the number of axes");
  std::vector<Axis> axes;
  for (const auto& ja : jaxes) {
    Axis a{header_get<std::string>(ja, "name"), header_get<double>(ja, "origin"),
           header_get<double>(ja, "step"), header_get<std::size_t>(ja, "count"),
           parse_parity(header_get<std::string>(ja, "parity"))};
    try {
      a.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedHeader, e.what());
    }
    axes.push_back(std::move(a));
  }
  const std::string scalar = header_get<std::string>(header, "scalar");
  ScalarKind kind;
  if (scalar == "real64") {
    kind = ScalarKind::Real64;
  } else if (scalar == "complex128") {
    kind = ScalarKind::Complex128;
  } else {
    throw Error(ErrorCode::MalformedHeader, "unknown scalar kind '" + scalar + "'");
  }

  std::size_t expected = kind == ScalarKind::Complex128 ? 2 : 1;
  for (const auto& a : axes) expected *= a.count;
  expected *= sizeof(double);

  std::ifstream pin(bin, std::ios::binary);
  if (!pin) throw Error(ErrorCode::Io, "cannot open " + bin.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(pin)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() != expected)
    throw Error(ErrorCode::CountMismatch,
                "payload has " + std::to_string(bytes.size()) + " bytes, header implies " +
                    std::to_string(expected));
  if (header.contains("payload_sha256") &&
      header["payload_sha256"].get<std::string>() != sha256_hex(bytes))
    throw Error(ErrorCode::ChecksumMismatch, bin.string());

  return GridField::from_raw(std::move(axes), kind, from_little_endian(std::move(bytes)),
                             header.value("meta", json::object()));
}

void write_csv(const GridField& field, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  for (const auto& a : field.axes()) out << a.name << ',';
  out << (field.is_complex() ? "re,im" : "value") << '\n';

  const auto& axes = field.axes();
  const auto raw = field.raw();
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t s = 0; s < field.size(); ++s) {
    for (std::size_t k = 0; k < axes.size(); ++k) out << axes[k].at(idx[k]) << ',';
    if (field.is_complex()) {
      out << raw[2 * s] << ',' << raw[2 * s + 1] << '\n';
    } else {
      out << raw[s] << '\n';
    }
    for (std::size_t k = axes.size(); k-- > 0;) {
      if (++idx[k] < axes[k].count) break;
      idx[k] = 0;
    }
  }
}

}  // namespace sphmean
