#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "wavegen/types.hpp"

namespace wavegen {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw io_error("unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace detail

// Deterministic, locale-independent formatting for CSV output. %.17g
// round-trips doubles exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw io_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

// --- code-matrix blob format ----------------------------------------------
//
// 16-byte header: magic "WVFC", u32 version, u32 N, u32 M (little endian),
// followed by any number of N x M complex matrices as row-major interleaved
// (re, im) IEEE float64 values.

inline constexpr char kCodeBlobMagic[4] = {'W', 'V', 'F', 'C'};
inline constexpr std::uint32_t kCodeBlobVersion = 1;

inline void write_code_blob(const std::string& path,
                            const std::vector<CodeMatrix>& mats,
                            std::uint32_t n, std::uint32_t m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out.write(kCodeBlobMagic, 4);
  detail::write_le<std::uint32_t>(out, kCodeBlobVersion);
  detail::write_le<std::uint32_t>(out, n);
  detail::write_le<std::uint32_t>(out, m);
  for (const auto& cm : mats) {
    require(cm.n() == Eigen::Index(n) && cm.m() == Eigen::Index(m),
            "code matrix shape does not match blob header");
    for (Eigen::Index r = 0; r < cm.n(); ++r)
      for (Eigen::Index c = 0; c < cm.m(); ++c) {
        detail::write_le<double>(out, std::real(cm.X(r, c)));
        detail::write_le<double>(out, std::imag(cm.X(r, c)));
      }
  }
  if (!out) throw io_error("write failed: " + path);
}

inline std::vector<CodeMatrix> read_code_blob(const std::string& path,
                                              std::uint32_t* n_out = nullptr,
                                              std::uint32_t* m_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCodeBlobMagic, 4) != 0)
    throw io_error("bad magic in code blob: " + path);
  const auto version = detail::read_le<std::uint32_t>(in);
  if (version != kCodeBlobVersion)
    throw io_error("unsupported code blob version in " + path);
  const auto n = detail::read_le<std::uint32_t>(in);
  const auto m = detail::read_le<std::uint32_t>(in);
  if (n_out) *n_out = n;
  if (m_out) *m_out = m;

  std::vector<CodeMatrix> mats;
  while (true) {
    in.peek();
    if (in.eof()) break;
    CMatrix x(n, m);
    for (std::uint32_t r = 0; r < n; ++r)
      for (std::uint32_t c = 0; c < m; ++c) {
        const double re = detail::read_le<double>(in);
        const double im = detail::read_le<double>(in);
        x(r, c) = Complex(re, im);
      }
    mats.emplace_back(std::move(x));
  }
  return mats;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path);
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << body;
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace wavegen
