#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrfbench {

/// n x d binary observation matrix, row-major.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t n, std::size_t d) : n_(n), d_(d), values_(n * d, 0) {}
  Dataset(std::size_t n, std::size_t d, std::vector<std::uint8_t> values)
      : n_(n), d_(d), values_(std::move(values)) {
    if (values_.size() != n_ * d_) throw std::invalid_argument("dataset size mismatch");
    for (auto x : values_)
      if (x > 1) throw std::invalid_argument("dataset entries must be 0 or 1");
  }

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return d_; }

  std::uint8_t operator()(std::size_t i, std::size_t v) const { return values_[i * d_ + v]; }
  void set(std::size_t i, std::size_t v, bool x) { values_[i * d_ + v] = x ? 1 : 0; }

  std::span<const std::uint8_t> row(std::size_t i) const { return {values_.data() + i * d_, d_}; }
  std::span<std::uint8_t> row(std::size_t i) { return {values_.data() + i * d_, d_}; }
  const std::vector<std::uint8_t>& values() const noexcept { return values_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<std::uint8_t> values_;
};

inline void write_dataset_csv(std::ostream& os, const Dataset& data) {
  std::string line;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    line.clear();
    for (std::size_t v = 0; v < data.cols(); ++v) {
      if (v) line += ',';
      line += data(i, v) ? '1' : '0';
    }
    line += '\n';
    os << line;
  }
}

inline Dataset read_dataset_csv(std::istream& is) {
  std::vector<std::uint8_t> values;
  std::size_t d = 0, n = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    for (std::size_t pos = 0; pos <= line.size();) {
      const auto comma = line.find(',', pos);
      const auto cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (cell != "0" && cell != "1") throw std::runtime_error("dataset csv: entries must be 0 or 1, got '" + cell + "'");
      values.push_back(cell == "1" ? 1 : 0);
      ++count;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (n == 0) d = count;
    else if (count != d) throw std::runtime_error("dataset csv: ragged row " + std::to_string(n + 1));
    ++n;
  }
  return Dataset(n, d, std::move(values));
}

// Bit-packed binary format: "SRBM", u32 n, u32 d (little-endian), then n*d bits
// row-major, least significant bit first within each byte, final byte zero-padded.

namespace detail {
inline void put_u32le(std::ostream& os, std::uint32_t x) {
  const char b[4] = {static_cast<char>(x & 0xff), static_cast<char>((x >> 8) & 0xff),
                     static_cast<char>((x >> 16) & 0xff), static_cast<char>((x >> 24) & 0xff)};
  os.write(b, 4);
}
inline std::uint32_t get_u32le(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("srbm binary: truncated header");
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
}
}  // namespace detail

inline void write_dataset_binary(std::ostream& os, const Dataset& data) {
  os.write("SRBM", 4);
  detail::put_u32le(os, static_cast<std::uint32_t>(data.rows()));
  detail::put_u32le(os, static_cast<std::uint32_t>(data.cols()));
  const auto& v = data.values();
  std::vector<char> packed((v.size() + 7) / 8, 0);
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k]) packed[k / 8] = static_cast<char>(packed[k / 8] | (1 << (k % 8)));
  os.write(packed.data(), static_cast<std::streamsize>(packed.size()));
}

inline Dataset read_dataset_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "SRBM") throw std::runtime_error("srbm binary: bad magic");
  const std::size_t n = detail::get_u32le(is);
  const std::size_t d = detail::get_u32le(is);
  std::vector<char> packed((n * d + 7) / 8);
  if (!is.read(packed.data(), static_cast<std::streamsize>(packed.size())))
    throw std::runtime_error("srbm binary: truncated payload");
  std::vector<std::uint8_t> values(n * d);
  for (std::size_t k = 0; k < values.size(); ++k)
    values[k] = (static_cast<unsigned char>(packed[k / 8]) >> (k % 8)) & 1u;
  return Dataset(n, d, std::move(values));
}

}  // namespace mrfbench
