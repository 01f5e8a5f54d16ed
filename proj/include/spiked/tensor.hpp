#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spiked/error.hpp"
#include "spiked/prior.hpp"
#include "spiked/rng.hpp"

namespace spiked {

inline constexpr std::size_t kDefaultMaxTensorEntries = std::size_t{1} << 27;

inline std::size_t tensor_size(int n, int p, std::size_t max_entries = kDefaultMaxTensorEntries) {
  if (n < 1 || p < 1) throw DomainError("tensor: n and p must be positive");
  std::size_t size = 1;
  for (int i = 0; i < p; ++i) {
    if (size > max_entries / static_cast<std::size_t>(n)) throw ResourceError("tensor: n^p exceeds the entry limit");
    size *= static_cast<std::size_t>(n);
  }
  return size;
}

/// N^{-(p-1)/2}
inline double signal_scale(int n, int p) { return std::pow(static_cast<double>(n), -0.5 * (p - 1)); }

/// <T, x^{(x)p}> for a row-major tensor (first index slowest), reduced one
/// axis at a time from the last.
inline double contract(std::span<const double> entries, int n, int p, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(n)) throw DomainError("contract: vector length must equal n");
  if (p == 1) return std::inner_product(entries.begin(), entries.end(), x.begin(), 0.0);
  std::size_t outer = entries.size() / n;
  std::vector<double> level(outer);
  for (std::size_t i = 0; i < outer; ++i)
    level[i] = std::inner_product(x.begin(), x.end(), entries.begin() + i * n, 0.0);
  while (outer > 1) {
    outer /= n;
    for (std::size_t i = 0; i < outer; ++i)
      level[i] = std::inner_product(x.begin(), x.end(), level.begin() + i * n, 0.0);
  }
  return level[0];
}

/// The i.i.d. standard Gaussian p-tensor Y. Only Y is stored: every
/// quantity computed here depends on the noise through <Y, x^{(x)p}>, which
/// equals <W, x^{(x)p}> for the symmetrized W.
struct Disorder {
  int n = 0;
  int p = 0;
  std::uint64_t seed = 0;
  std::vector<double> entries;
};

inline Disorder sample_disorder(int n, int p, std::uint64_t seed, std::size_t max_entries = kDefaultMaxTensorEntries) {
  if (n < 2 || p < 2) throw DomainError("sample_disorder: n and p must be >= 2");
  Disorder d{n, p, seed, std::vector<double>(tensor_size(n, p, max_entries))};
  CounterRng rng(seed, StreamTag::Disorder, 0);
  for (auto& y : d.entries) y = rng.normal();
  return d;
}

/// X_N(sigma) = N^{-(p-1)/2} <Y, sigma^{(x)p}>
inline double hamiltonian_x(const Disorder& d, std::span<const double> row) {
  return signal_scale(d.n, d.p) * contract(d.entries, d.n, d.p, row);
}

/// Average over all p! axis permutations (the symmetric tensor W).
inline std::vector<double> symmetrize(std::span<const double> entries, int n, int p) {
  const std::size_t size = tensor_size(n, p);
  if (entries.size() != size) throw DomainError("symmetrize: entry count must be n^p");
  std::vector<int> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> out(size, 0.0);
  std::vector<int> idx(p);
  std::vector<std::size_t> stride(p);
  for (int a = p - 1, s = 1; a >= 0; --a, s *= n) stride[a] = static_cast<std::size_t>(s);
  double count = 0.0;
  do {
    count += 1.0;
    for (std::size_t flat = 0; flat < size; ++flat) {
      std::size_t rem = flat;
      for (int a = p - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rem % n);
        rem /= n;
      }
      std::size_t src = 0;
      for (int a = 0; a < p; ++a) src += idx[perm[a]] * stride[a];
      out[flat] += entries[src];
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& v : out) v /= count;
  return out;
}

/// Draws one vector of N i.i.d. samples from `prior`.
inline std::vector<double> sample_vector(const Prior& prior, int n, CounterRng& rng) {
  std::vector<double> weights;
  for (const auto& a : prior.atoms()) weights.push_back(a.weight);
  std::vector<double> out(n);
  for (auto& x : out) x = prior[rng.categorical(weights)].point;
  return out;
}

/// T_k = Y + scale * N^{-(p-1)/2} sum_r beta_r u(r)^{(x)p}. `scale` is sqrt(t)
/// for the interpolating tensor T_k(t) and 1 otherwise.
struct SpikedTensor {
  int n = 0;
  int p = 0;
  int k = 0;
  std::vector<double> beta_bar;
  std::vector<std::vector<double>> spikes;  // u(r), k x N
  std::uint64_t seed = 0;
  double scale = 1.0;
  std::vector<double> noise;    // Y
  std::vector<double> entries;  // T
};

/// Adds scale * N^{-(p-1)/2} sum_r beta_r u(r)^{(x)p} to `entries` in place.
inline void add_spikes(std::vector<double>& entries, int n, int p, const std::vector<double>& beta_bar,
                       const std::vector<std::vector<double>>& spikes, double scale) {
  const double factor = scale * signal_scale(n, p);
  std::vector<int> idx(p, 0);
  for (std::size_t flat = 0; flat < entries.size(); ++flat) {
    double add = 0.0;
    for (std::size_t r = 0; r < spikes.size(); ++r) {
      double prod = beta_bar[r];
      for (int a = 0; a < p; ++a) prod *= spikes[r][idx[a]];
      add += prod;
    }
    entries[flat] += factor * add;
    for (int a = p - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
}

inline SpikedTensor make_spiked_tensor(int n, int p, const std::vector<Prior>& priors,
                                       const std::vector<double>& beta_bar, std::uint64_t seed, double scale = 1.0,
                                       std::size_t max_entries = kDefaultMaxTensorEntries) {
  if (priors.size() != beta_bar.size()) throw DomainError("make_spiked_tensor: one SNR per prior required");
  if (priors.empty()) throw DomainError("make_spiked_tensor: at least one spike required");
  SpikedTensor t;
  t.n = n;
  t.p = p;
  t.k = static_cast<int>(priors.size());
  t.beta_bar = beta_bar;
  t.seed = seed;
  t.scale = scale;
  t.noise = sample_disorder(n, p, seed, max_entries).entries;
  for (std::size_t r = 0; r < priors.size(); ++r) {
    CounterRng rng(seed, StreamTag::Spike, r);
    t.spikes.push_back(sample_vector(priors[r], n, rng));
  }
  t.entries = t.noise;
  add_spikes(t.entries, n, p, beta_bar, t.spikes, scale);
  return t;
}

/// Binary tensor export: one JSON header line {n, p, k, beta_bar, seed}
/// followed by n^p little-endian IEEE-754 doubles, first index slowest.
inline void write_tensor(const std::string& path, std::span<const double> entries, int n, int p, int k,
                         const std::vector<double>& beta_bar, std::uint64_t seed) {
  if (entries.size() != tensor_size(n, p)) throw DomainError("write_tensor: entry count must be n^p");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("write_tensor: cannot open " + path);
  const nlohmann::json header{{"n", n}, {"p", p}, {"k", k}, {"beta_bar", beta_bar}, {"seed", seed}};
  out << header.dump() << '\n';
  for (double v : entries) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
}

struct TensorFile {
  nlohmann::json header;
  std::vector<double> entries;
};

inline TensorFile read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("read_tensor: cannot open " + path);
  TensorFile file;
  std::string line;
  std::getline(in, line);
  file.header = nlohmann::json::parse(line);
  const std::size_t size = tensor_size(file.header.at("n").get<int>(), file.header.at("p").get<int>());
  file.entries.resize(size);
  for (auto& v : file.entries) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw DomainError("read_tensor: truncated payload");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
  return file;
}

}  // namespace spiked
