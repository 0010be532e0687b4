#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pccs {

// Dense row-major matrix of 64-bit reals. Batches are laid out one sample per row.
using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_shape(const Tensor2& t, Index rows, Index cols, const char* what);
void require_finite(const Tensor2& t, const char* what);

// Portable seeded generator, bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::uint64_t state_[4];
};

struct Param {
  Tensor2 value;
  Tensor2 grad;
};

// Named parameter tensors with same-shape gradient accumulators. Iteration order
// is lexicographic by name, which fixes the order of every reduction over entries.
class ParamSet {
 public:
  Param& add(const std::string& name, Index rows, Index cols);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  void zero_grad();
  std::size_t size() const { return entries_.size(); }
  std::size_t num_values() const;

  // Fill every entry uniformly in +-1/sqrt(fan_in), fan_in = rows of the weight.
  void init_uniform(const std::string& name, Index fan_in, Rng& rng);

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  // Copy values of every entry whose name starts with prefix into `dst`, renaming
  // the prefix to `dst_prefix`.
  void copy_values_into(ParamSet& dst, const std::string& prefix,
                        const std::string& dst_prefix) const;

  bool operator==(const ParamSet& other) const;

 private:
  std::map<std::string, Param> entries_;
};

}  // namespace pccs
