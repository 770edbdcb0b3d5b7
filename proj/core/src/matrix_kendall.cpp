#include "mktau/matrix_kendall.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <unordered_set>
#include <vector>

#include "mktau/spectral.hpp"

namespace mktau {
namespace {

// Pairs (i,j), i<j, enumerated lexicographically. Chunk size is fixed so the
// partial-sum grid (and therefore the floating-point result) does not depend
// on the thread count.
constexpr std::int64_t kChunkPairs = 256;

std::int64_t pairs_before_row(std::int64_t i, std::int64_t T) {
  return i * (2 * T - i - 1) / 2;
}

// Inverse of the lexicographic enumeration: linear index m -> (i, j).
std::pair<std::int64_t, std::int64_t> pair_at(std::int64_t m, std::int64_t T) {
  double Td = static_cast<double>(T);
  std::int64_t i = static_cast<std::int64_t>(
      std::floor(((2.0 * Td - 1.0) - std::sqrt((2.0 * Td - 1.0) * (2.0 * Td - 1.0) - 8.0 * static_cast<double>(m))) / 2.0));
  i = std::clamp<std::int64_t>(i, 0, T - 2);
  while (pairs_before_row(i + 1, T) <= m) ++i;
  while (pairs_before_row(i, T) > m) --i;
  std::int64_t j = i + 1 + (m - pairs_before_row(i, T));
  return {i, j};
}

struct ChunkResult {
  Eigen::MatrixXd acc;         // lower triangle holds the kernel sum
  std::int64_t used = 0;
};

// Accumulates the kernels of the pairs whose linear indices are
// pair_ids[begin..end) (or the identity mapping when pair_ids is null).
ChunkResult accumulate_chunk(const std::vector<Eigen::MatrixXd>& slices, KendallSide side,
                             const std::vector<std::int64_t>* pair_ids, std::int64_t begin,
                             std::int64_t end, std::int64_t T, Index p) {
  ChunkResult out;
  out.acc = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd diff;
  std::int64_t i = -1, j = -1;
  bool sequential = (pair_ids == nullptr);
  if (sequential) {
    auto ij = pair_at(begin, T);
    i = ij.first;
    j = ij.second;
  }
  for (std::int64_t m = begin; m < end; ++m) {
    if (!sequential) {
      auto ij = pair_at((*pair_ids)[m], T);
      i = ij.first;
      j = ij.second;
    }
    diff = slices[i] - slices[j];
    double n2 = diff.squaredNorm();
    if (n2 > 0.0) {
      if (side == KendallSide::row)
        out.acc.selfadjointView<Eigen::Lower>().rankUpdate(diff, 1.0 / n2);
      else
        out.acc.selfadjointView<Eigen::Lower>().rankUpdate(diff.transpose(), 1.0 / n2);
      ++out.used;
    }
    if (sequential) {
      if (++j == T) {
        ++i;
        j = i + 1;
      }
    }
  }
  return out;
}

// Floyd's algorithm: k distinct values from [0, n), then sorted ascending so
// the chunked reduction order is deterministic.
std::vector<std::int64_t> sample_distinct(std::int64_t n, std::int64_t k, Rng& rng) {
  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  for (std::int64_t top = n - k; top < n; ++top) {
    std::int64_t r = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(top + 1)));
    if (!chosen.insert(r).second) chosen.insert(top);
  }
  std::vector<std::int64_t> ids(chosen.begin(), chosen.end());
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

Eigen::MatrixXd pair_kernel(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xp,
                            KendallSide side) {
  if (X.rows() != Xp.rows() || X.cols() != Xp.cols())
    throw ParamError("pair_kernel: observations must share a shape");
  Eigen::MatrixXd diff = X - Xp;
  double n2 = diff.squaredNorm();
  if (n2 == 0.0)
    throw DegenerateError("pair_kernel: zero difference (tied observations)");
  if (side == KendallSide::row) return (diff * diff.transpose()) / n2;
  return (diff.transpose() * diff) / n2;
}

KendallTau kendall(const MatrixSeries& series, KendallSide side,
                   const std::optional<Subsample>& subsample, int threads) {
  if (series.T < 2) throw ParamError("kendall: need T >= 2 observations");
  if (threads < 1) throw ParamError("kendall: thread count must be >= 1");
  const std::int64_t T = series.T;
  const Index p = side == KendallSide::row ? series.p1 : series.p2;
  const std::int64_t total_pairs = T * (T - 1) / 2;

  // Column-major working copies; the pair loop reads each slice many times.
  std::vector<Eigen::MatrixXd> slices;
  slices.reserve(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) slices.emplace_back(series.slice(t));

  std::vector<std::int64_t> subsample_ids;
  const std::vector<std::int64_t>* pair_ids = nullptr;
  std::int64_t n_pairs = total_pairs;
  if (subsample.has_value()) {
    if (subsample->n_pairs < 1) throw ParamError("kendall: subsample pair count must be >= 1");
    if (subsample->n_pairs < total_pairs) {
      Rng rng = subsample->rng;
      subsample_ids = sample_distinct(total_pairs, subsample->n_pairs, rng);
      pair_ids = &subsample_ids;
      n_pairs = subsample->n_pairs;
    }
  }

  const std::int64_t n_chunks = (n_pairs + kChunkPairs - 1) / kChunkPairs;
  std::vector<ChunkResult> partial(static_cast<std::size_t>(n_chunks));

  auto run_chunk = [&](std::int64_t chunk) {
    std::int64_t begin = chunk * kChunkPairs;
    std::int64_t end = std::min(begin + kChunkPairs, n_pairs);
    partial[static_cast<std::size_t>(chunk)] =
        accumulate_chunk(slices, side, pair_ids, begin, end, T, p);
  };

  int workers = static_cast<int>(std::min<std::int64_t>(threads, n_chunks));
  if (workers <= 1) {
    for (std::int64_t chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::int64_t chunk = next.fetch_add(1, std::memory_order_relaxed);
          if (chunk >= n_chunks) return;
          run_chunk(chunk);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  // Combine partial sums in chunk order: bit-identical across thread counts.
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
  std::int64_t used = 0;
  for (const ChunkResult& part : partial) {
    acc.triangularView<Eigen::Lower>() += part.acc;
    used += part.used;
  }
  if (used == 0)
    throw DegenerateError("kendall: all observation pairs are degenerate (constant series)");

  KendallTau out;
  out.side = side;
  out.dim = p;
  out.mat = Eigen::MatrixXd(acc.selfadjointView<Eigen::Lower>()) / static_cast<double>(used);
  out.pairs_used = used;
  return out;
}

KendallTau population_kendall_mc(const EllipticalLaw& law, std::int64_t n_pairs, Rng& rng,
                                 KendallSide side) {
  if (n_pairs < 1) throw ParamError("population_kendall_mc: n_pairs must be >= 1");
  if (law.dist == Dist::student_t && law.nu < 1)
    throw ParamError("population_kendall_mc: t distribution requires nu >= 1");
  const Index p1 = law.Sigma.rows();
  const Index p2 = law.Omega.rows();
  Eigen::MatrixXd S = psd_sqrt(law.Sigma);
  Eigen::MatrixXd W = psd_sqrt(law.Omega);
  const Index p = side == KendallSide::row ? p1 : p2;

  Eigen::MatrixXd Z(p1, p2);
  auto draw = [&]() {
    for (Index r = 0; r < p1; ++r)
      for (Index c = 0; c < p2; ++c) Z(r, c) = rng.normal();
    Eigen::MatrixXd X = S * Z * W;
    if (law.dist == Dist::student_t)
      X /= std::sqrt(rng.chi_squared(law.nu) / static_cast<double>(law.nu));
    return X;
  };

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
  std::int64_t used = 0;
  for (std::int64_t m = 0; m < n_pairs; ++m) {
    Eigen::MatrixXd diff = draw() - draw();
    double n2 = diff.squaredNorm();
    if (n2 == 0.0) continue;
    if (side == KendallSide::row)
      acc.selfadjointView<Eigen::Lower>().rankUpdate(diff, 1.0 / n2);
    else
      acc.selfadjointView<Eigen::Lower>().rankUpdate(diff.transpose(), 1.0 / n2);
    ++used;
  }
  if (used == 0)
    throw DegenerateError("population_kendall_mc: all sampled pairs degenerate");

  KendallTau out;
  out.side = side;
  out.dim = p;
  out.mat = Eigen::MatrixXd(acc.selfadjointView<Eigen::Lower>()) / static_cast<double>(used);
  out.pairs_used = used;
  return out;
}

}  // namespace mktau
