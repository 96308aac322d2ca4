#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace burgers {

enum class NoiseMode {
  /// One Brownian path per sample shared by every start point.
  common,
  /// A separate path per (sample, start point).
  independent,
};

std::string_view to_string(NoiseMode mode) noexcept;
NoiseMode noise_mode_from_string(std::string_view name);

struct BrownianOptions {
  /// Number of start points (only used in independent mode).
  std::size_t start_count = 1;
  /// Pair path 2q+1 with the negated increments of path 2q.
  bool antithetic = false;
  /// Global index of the first path; lets large ensembles be built in
  /// batches that reproduce a single monolithic draw.
  std::size_t first_path = 0;

  friend bool operator==(const BrownianOptions&, const BrownianOptions&) = default;
};

/// Stream identifier of (global path, start) under the given mode. With
/// antithetic pairing the odd member shares its partner's stream.
std::uint64_t noise_stream(std::size_t global_path, std::size_t start, std::size_t start_count,
                           NoiseMode mode, bool antithetic) noexcept;
/// +1, or -1 for the odd member of an antithetic pair.
inline double antithetic_sign(std::size_t global_path, bool antithetic) noexcept {
  return (antithetic && (global_path & 1u)) ? -1.0 : 1.0;
}

/// Materialized Brownian increments ΔW_j = W(t_{j+1}) - W(t_j) for an
/// ensemble of paths. increments are laid out [path][start][step][component].
class BrownianEnsemble {
 public:
  BrownianEnsemble(std::vector<double> times, int dim, std::size_t paths, NoiseMode mode,
                   std::uint64_t seed, BrownianOptions options, std::vector<double> increments);

  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t step_count() const noexcept { return times_.size() - 1; }
  int dim() const noexcept { return dim_; }
  std::size_t paths() const noexcept { return paths_; }
  std::size_t start_count() const noexcept { return starts_; }
  NoiseMode mode() const noexcept { return mode_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const BrownianOptions& options() const noexcept { return options_; }

  /// ΔW at (path, start, step); `start` is ignored in common mode.
  std::span<const double> increment(std::size_t path, std::size_t start, std::size_t step) const noexcept;
  std::span<const double> increments() const noexcept { return increments_; }

  /// Copy with increments at steps >= `step` replaced by zero.
  BrownianEnsemble truncated(std::size_t step) const;

  friend bool operator==(const BrownianEnsemble&, const BrownianEnsemble&) = default;

 private:
  std::vector<double> times_;
  int dim_;
  std::size_t paths_;
  std::size_t starts_;
  NoiseMode mode_;
  std::uint64_t seed_;
  BrownianOptions options_;
  std::vector<double> increments_;
};

/// Draws i.i.d. N(0, Δt_j) increments per component. Each value is a pure
/// function of (seed, stream(path, start), step, component), so the result
/// does not depend on thread count or batch layout.
BrownianEnsemble sample_brownian(std::span<const double> times, std::size_t paths, int dim,
                                 NoiseMode mode, std::uint64_t seed, const BrownianOptions& options = {});

}  // namespace burgers
