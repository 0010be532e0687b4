#include "pccs/tensor.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pccs {

void require_shape(const Tensor2& t, Index rows, Index cols, const char* what) {
  if (t.rows() != rows || t.cols() != cols) {
    std::ostringstream os;
    os << what << ": expected " << rows << "x" << cols << ", got " << t.rows() << "x"
       << t.cols();
    throw DimensionError(os.str());
  }
}

void require_finite(const Tensor2& t, const char* what) {
  if (!t.allFinite()) throw NumericError(std::string(what) + ": non-finite value");
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& s : state_) s = splitmix64(seed);
}

// xoshiro256**
std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  // rejection sampling
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Param& ParamSet::add(const std::string& name, Index rows, Index cols) {
  auto [it, inserted] = entries_.try_emplace(name);
  if (!inserted) throw std::invalid_argument("duplicate parameter name: " + name);
  it->second.value = Tensor2::Zero(rows, cols);
  it->second.grad = Tensor2::Zero(rows, cols);
  return it->second;
}

Param& ParamSet::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

const Param& ParamSet::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

void ParamSet::zero_grad() {
  for (auto& [name, p] : entries_) p.grad.setZero();
}

std::size_t ParamSet::num_values() const {
  std::size_t n = 0;
  for (const auto& [name, p] : entries_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParamSet::init_uniform(const std::string& name, Index fan_in, Rng& rng) {
  Param& p = at(name);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.uniform(-bound, bound);
}

void ParamSet::copy_values_into(ParamSet& dst, const std::string& prefix,
                                const std::string& dst_prefix) const {
  for (const auto& [name, p] : entries_) {
    if (name.rfind(prefix, 0) != 0) continue;
    Param& target = dst.at(dst_prefix + name.substr(prefix.size()));
    require_shape(target.value, p.value.rows(), p.value.cols(), name.c_str());
    target.value = p.value;
  }
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (a->first != b->first) return false;
    if (a->second.value.rows() != b->second.value.rows() ||
        a->second.value.cols() != b->second.value.cols())
      return false;
    if (a->second.value != b->second.value) return false;
  }
  return true;
}

}  // namespace pccs
