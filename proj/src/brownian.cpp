#include "burgers/brownian.hpp"

#include <cmath>

#include "burgers/error.hpp"
#include "burgers/parallel.hpp"
#include "burgers/rng.hpp"
#include "burgers/torus_field.hpp"

namespace burgers {

std::string_view to_string(NoiseMode mode) noexcept {
  return mode == NoiseMode::common ? "common" : "independent";
}

NoiseMode noise_mode_from_string(std::string_view name) {
  if (name == "common") return NoiseMode::common;
  if (name == "independent") return NoiseMode::independent;
  throw InvalidInput("unknown noise mode '" + std::string(name) + "'");
}

std::uint64_t noise_stream(std::size_t global_path, std::size_t start, std::size_t start_count,
                           NoiseMode mode, bool antithetic) noexcept {
  const std::uint64_t path = antithetic ? (global_path & ~std::size_t{1}) : global_path;
  return mode == NoiseMode::common ? path : path * start_count + start;
}

BrownianEnsemble::BrownianEnsemble(std::vector<double> times, int dim, std::size_t paths,
                                   NoiseMode mode, std::uint64_t seed, BrownianOptions options,
                                   std::vector<double> increments)
    : times_(std::move(times)),
      dim_(dim),
      paths_(paths),
      starts_(mode == NoiseMode::common ? 1 : options.start_count),
      mode_(mode),
      seed_(seed),
      options_(options),
      increments_(std::move(increments)) {
  validate_time_grid(times_);
  if (dim < 1) throw InvalidInput("Brownian dimension must be >= 1");
  if (paths < 1) throw InvalidInput("Brownian ensemble needs at least one path");
  if (starts_ < 1) throw InvalidInput("independent noise needs at least one start point");
  if (increments_.size() != paths_ * starts_ * step_count() * dim_) {
    throw InvalidInput("Brownian increment array has the wrong size");
  }
  for (double v : increments_) {
    if (!std::isfinite(v)) throw InvalidInput("Brownian increments must be finite");
  }
}

std::span<const double> BrownianEnsemble::increment(std::size_t path, std::size_t start,
                                                    std::size_t step) const noexcept {
  if (mode_ == NoiseMode::common) start = 0;
  const std::size_t offset = ((path * starts_ + start) * step_count() + step) * dim_;
  return std::span(increments_).subspan(offset, dim_);
}

BrownianEnsemble BrownianEnsemble::truncated(std::size_t step) const {
  auto copy = *this;
  for (std::size_t p = 0; p < paths_ * starts_; ++p) {
    for (std::size_t j = step; j < step_count(); ++j) {
      for (int c = 0; c < dim_; ++c) copy.increments_[(p * step_count() + j) * dim_ + c] = 0.0;
    }
  }
  return copy;
}

BrownianEnsemble sample_brownian(std::span<const double> times, std::size_t paths, int dim,
                                 NoiseMode mode, std::uint64_t seed, const BrownianOptions& options) {
  validate_time_grid(times);
  if (paths < 1) throw InvalidInput("sample_brownian: path count must be >= 1");
  if (dim < 1) throw InvalidInput("sample_brownian: dimension must be >= 1");
  const std::size_t starts = mode == NoiseMode::common ? 1 : options.start_count;
  if (starts < 1) throw InvalidInput("sample_brownian: start_count must be >= 1");
  const std::size_t steps = times.size() - 1;
  std::vector<double> sqrt_dt(steps);
  for (std::size_t j = 0; j < steps; ++j) sqrt_dt[j] = std::sqrt(times[j + 1] - times[j]);

  std::vector<double> increments(paths * starts * steps * dim);
  parallel_for(paths, [&](std::size_t p) {
    const std::size_t global = options.first_path + p;
    const double sign = antithetic_sign(global, options.antithetic);
    for (std::size_t s = 0; s < starts; ++s) {
      NormalStream normal(seed, noise_stream(global, s, starts, mode, options.antithetic));
      double* out = increments.data() + (p * starts + s) * steps * dim;
      for (std::size_t j = 0; j < steps; ++j) {
        for (int c = 0; c < dim; ++c) out[j * dim + c] = sign * sqrt_dt[j] * normal(j * dim + c);
      }
    }
  });
  return BrownianEnsemble(std::vector<double>(times.begin(), times.end()), dim, paths, mode, seed,
                          options, std::move(increments));
}

}  // namespace burgers
