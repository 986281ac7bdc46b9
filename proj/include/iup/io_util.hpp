#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "iup/errors.hpp"

namespace iup::io {

namespace fs = std::filesystem;

inline constexpr const char* kToolkitVersion = "0.1.0";

using Bytes = std::vector<unsigned char>;

inline std::uint64_t fnv1a64(const Bytes& data) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string checksum_string(const Bytes& data) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

inline Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

inline void append_f32_le(Bytes& out, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFF));
}

inline void append_f64_le(Bytes& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFF));
}

inline float load_f32_le(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

inline double load_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

// Stages files under a `.partial` suffix and renames them into place on
// commit(). Anything staged but not committed is removed on destruction, so a
// failed export leaves no file that looks complete.
class StagedWriter {
 public:
  explicit StagedWriter(fs::path directory) : dir_(std::move(directory)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create directory '" + dir_.string() + "'");
  }
  StagedWriter(const StagedWriter&) = delete;
  StagedWriter& operator=(const StagedWriter&) = delete;

  ~StagedWriter() {
    if (committed_) return;
    for (const auto& p : staged_) {
      std::error_code ec;
      fs::remove(partial_path(p), ec);
    }
  }

  const fs::path& directory() const noexcept { return dir_; }

  fs::path stage(const std::string& name, const Bytes& data) {
    const fs::path final_path = dir_ / name;
    const fs::path tmp = partial_path(final_path);
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write '" + tmp.string() + "'");
      staged_.push_back(final_path);
      out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
      if (!out) throw IoError("short write to '" + tmp.string() + "'");
    }
    return final_path;
  }

  std::vector<fs::path> commit() {
    for (const auto& p : staged_) {
      std::error_code ec;
      fs::rename(partial_path(p), p, ec);
      if (ec) throw IoError("cannot move '" + partial_path(p).string() + "' into place: " + ec.message());
    }
    committed_ = true;
    return staged_;
  }

 private:
  static fs::path partial_path(const fs::path& p) { return fs::path(p.string() + ".partial"); }

  fs::path dir_;
  std::vector<fs::path> staged_;
  bool committed_ = false;
};

}  // namespace iup::io
