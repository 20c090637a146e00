#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace moesim {

// Purpose-separated random streams. Each purpose owns an independent
// counter-based stream, so e.g. recording extra snapshots never shifts the
// training data sequence.
enum class Stream : std::uint32_t {
  teacher = 1,
  init_experts = 2,
  init_routers = 3,
  data = 4,
  prune_eval = 5,
  finetune_data = 6,
  test = 7,
};

// Philox4x32-10 block cipher. Keyed by (seed, stream, substream); the block
// index is the counter. Output is a deterministic function of
// (seed, stream, substream, block), independent of call history.
struct Philox4x32 {
  std::uint32_t key0, key1;
  std::uint32_t ctr2, ctr3;

  Philox4x32(std::uint64_t seed, Stream stream, std::uint64_t substream = 0);

  // Encrypts block index `n` into 4x32 bits of output.
  void block(std::uint64_t n, std::uint32_t out[4]) const;
};

// Sequential convenience wrapper over Philox: uniform and Gaussian draws.
// Draw i depends only on (key, i), so two streams with the same key produce
// identical sequences.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, Stream stream, std::uint64_t substream = 0)
      : gen_(seed, stream, substream) {}

  std::uint64_t next_u64();
  double next_uniform();   // (0, 1]
  double next_gaussian();  // N(0, 1), Box-Muller

 private:
  Philox4x32 gen_;
  std::uint64_t block_ = 0;
  std::uint32_t buf_[4];
  int buf_pos_ = 4;
  double cached_gaussian_ = 0.0;
  bool has_cached_ = false;
};

// Row-major fill of an n x d matrix with N(0, sigma^2) entries.
Eigen::MatrixXd gaussian_matrix(int rows, int cols, double sigma,
                                std::uint64_t seed, Stream stream,
                                std::uint64_t substream = 0);

}  // namespace moesim
