#include "moesim/rng.hpp"

#include <cmath>
#include <numbers>

namespace moesim {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, Stream stream,
                       std::uint64_t substream)
    : key0(static_cast<std::uint32_t>(seed)),
      key1(static_cast<std::uint32_t>(seed >> 32)),
      ctr2(static_cast<std::uint32_t>(stream) ^
           static_cast<std::uint32_t>(substream >> 32)),
      ctr3(static_cast<std::uint32_t>(substream)) {}

void Philox4x32::block(std::uint64_t n, std::uint32_t out[4]) const {
  std::uint32_t c0 = static_cast<std::uint32_t>(n);
  std::uint32_t c1 = static_cast<std::uint32_t>(n >> 32);
  std::uint32_t c2 = ctr2;
  std::uint32_t c3 = ctr3;
  std::uint32_t k0 = key0;
  std::uint32_t k1 = key1;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c0, hi0, lo0);
    mulhilo(kPhiloxM1, c2, hi1, lo1);
    std::uint32_t n0 = hi1 ^ c1 ^ k0;
    std::uint32_t n1 = lo1;
    std::uint32_t n2 = hi0 ^ c3 ^ k1;
    std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  out[0] = c0;
  out[1] = c1;
  out[2] = c2;
  out[3] = c3;
}

std::uint64_t GaussianStream::next_u64() {
  if (buf_pos_ >= 3) {  // never split a u64 across blocks
    gen_.block(block_++, buf_);
    buf_pos_ = 0;
  }
  std::uint64_t lo = buf_[buf_pos_];
  std::uint64_t hi = buf_[buf_pos_ + 1];
  buf_pos_ += 2;
  return (hi << 32) | lo;
}

double GaussianStream::next_uniform() {
  // 53-bit mantissa in (0, 1]
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianStream::next_gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_gaussian_;
  }
  double u1 = next_uniform();
  double u2 = next_uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

Eigen::MatrixXd gaussian_matrix(int rows, int cols, double sigma,
                                std::uint64_t seed, Stream stream,
                                std::uint64_t substream) {
  GaussianStream g(seed, stream, substream);
  Eigen::MatrixXd out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = sigma * g.next_gaussian();
  return out;
}

}  // namespace moesim
