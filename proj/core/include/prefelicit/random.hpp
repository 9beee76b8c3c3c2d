#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace prefelicit {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent, reproducible streams
/// from a base seed and a list of tags (instance id, round, worker, ...).
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix_seed(base);
  for (auto t : tags) s = mix_seed(s ^ mix_seed(t + 0x632be59bd9b4e019ULL));
  return s;
}

/// Stable 64-bit FNV-1a hash, for turning string tags into seed material.
constexpr std::uint64_t hash_tag(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = normal(rng);
  return out;
}

/// One Dirichlet draw through normalized Gamma variates.
void sample_dirichlet(const Eigen::VectorXd& alpha, Rng& rng,
                      Eigen::Ref<Eigen::VectorXd> out);

inline Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha,
                                        Rng& rng) {
  Eigen::VectorXd out(alpha.size());
  sample_dirichlet(alpha, rng, out);
  return out;
}

}  // namespace prefelicit
