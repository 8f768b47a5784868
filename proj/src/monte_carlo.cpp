#include "convextest/monte_carlo.h"

#include <cmath>
#include <random>
#include <vector>

#include "convextest/parallel.h"

namespace convextest {

namespace {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

McEstimate mc_error(const AffineDetector<double>& detector, const Vector<double>& theta,
                    const Matrix<double>& sigma, int label, std::int64_t n_samples,
                    std::uint64_t seed, const McOptions& opts) {
  if (n_samples < 1) throw InvalidArgument("n_samples", "must be at least 1");
  if (label != 1 && label != -1) throw InvalidArgument("label", "must be +1 or -1");
  if (opts.chunk_size < 1) throw InvalidArgument("chunk_size", "must be at least 1");
  const auto d = theta.size();
  if (detector.w.size() != d || sigma.rows() != d || sigma.cols() != d)
    throw DimensionMismatch("mc_error: detector, theta and sigma dimensions differ");
  Eigen::LLT<Matrix<double>> llt(sigma);
  if (llt.info() != Eigen::Success) throw InvalidArgument("sigma", "not positive definite");

  // h(theta + L z) = h(theta) + (L^T w)^T z
  const double mean = detector(theta);
  const Vector<double> proj = llt.matrixL().transpose() * detector.w;

  const std::int64_t chunks = (n_samples + opts.chunk_size - 1) / opts.chunk_size;
  std::vector<std::int64_t> errors(static_cast<std::size_t>(chunks), 0);
  parallel_for(static_cast<std::size_t>(chunks), opts.threads, [&](std::size_t k) {
    auto rng = substream(seed, k);
    std::normal_distribution<double> normal;
    const std::int64_t begin = static_cast<std::int64_t>(k) * opts.chunk_size;
    const std::int64_t count = std::min(opts.chunk_size, n_samples - begin);
    std::int64_t local = 0;
    for (std::int64_t s = 0; s < count; ++s) {
      double h = mean;
      for (Eigen::Index i = 0; i < d; ++i) h += proj(i) * normal(rng);
      const int decision = h >= 0.0 ? 1 : -1;
      local += decision != label;
    }
    errors[k] = local;
  });

  std::int64_t total = 0;
  for (auto e : errors) total += e;
  const double n = static_cast<double>(n_samples);
  const double p = static_cast<double>(total) / n;
  return {p, std::sqrt(p * (1.0 - p) / n), total, n_samples, opts.chunk_size};
}

}  // namespace convextest
