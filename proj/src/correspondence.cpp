#include "regalign/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <unordered_set>

#include "kdtree.hpp"
#include "regalign/geometry.hpp"
#include "regalign/solver.hpp"

namespace regalign {

namespace {

constexpr int kBruteForceLimit = 64;

double distance_stddev(const std::vector<Match>& matches) {
  double mean = 0.0;
  for (const Match& m : matches) mean += m.distance;
  mean /= static_cast<double>(matches.size());
  double var = 0.0;
  for (const Match& m : matches) {
    const double dev = m.distance - mean;
    var += dev * dev;
  }
  return std::sqrt(var / static_cast<double>(matches.size()));
}

std::vector<Match> trim_impl(const std::vector<Match>& matches, double trim_factor) {
  double mean = 0.0;
  for (const Match& m : matches) mean += m.distance;
  mean /= static_cast<double>(matches.size());
  const double s = distance_stddev(matches);
  // Zero spread means no outliers by this criterion; spread at roundoff
  // level counts as zero.
  if (s <= 1e-12 * std::max(1.0, mean)) return matches;
  std::vector<Match> kept;
  kept.reserve(matches.size());
  for (const Match& m : matches) {
    if (m.distance <= trim_factor * s) kept.push_back(m);
  }
  return kept;
}

}  // namespace

std::vector<Match> nearest_neighbors(const PointSet& source, const PointSet& target) {
  if (source.dim() != target.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "point set dimension mismatch");
  }
  const int ns = source.size();
  const int nt = target.size();
  std::vector<Match> out;
  out.reserve(ns);

  if (nt < kBruteForceLimit) {
    for (int i = 0; i < ns; ++i) {
      int best = 0;
      double best_sq = (target.points().col(0) - source.points().col(i)).squaredNorm();
      for (int j = 1; j < nt; ++j) {
        const double sq = (target.points().col(j) - source.points().col(i)).squaredNorm();
        if (sq < best_sq) {
          best = j;
          best_sq = sq;
        }
      }
      out.push_back({i, best, std::sqrt(best_sq)});
    }
    return out;
  }

  detail::KdTree tree(target.points());
  for (int i = 0; i < ns; ++i) {
    const auto [idx, sq] = tree.nearest(source.points().col(i));
    out.push_back({i, idx, std::sqrt(sq)});
  }
  return out;
}

std::vector<Match> resolve_multiple_assignments(const std::vector<Match>& raw,
                                                std::uint64_t seed) {
  std::map<int, std::vector<Match>> by_target;
  for (const Match& m : raw) by_target[m.target].push_back(m);

  std::mt19937_64 rng(seed);
  std::vector<Match> out;
  out.reserve(by_target.size());
  for (auto& [target, candidates] : by_target) {
    double best = candidates.front().distance;
    for (const Match& m : candidates) best = std::min(best, m.distance);
    std::vector<Match> tied;
    for (const Match& m : candidates) {
      if (m.distance == best) tied.push_back(m);
    }
    if (tied.size() == 1) {
      out.push_back(tied.front());
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
      out.push_back(tied[pick(rng)]);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Match& a, const Match& b) { return a.source < b.source; });
  return out;
}

std::vector<Match> trim_outliers(const std::vector<Match>& matches, double trim_factor) {
  if (matches.empty()) {
    throw Error(ErrorCode::invalid_argument, "trim_outliers requires a nonempty match list");
  }
  if (trim_factor <= 0.0) {
    throw Error(ErrorCode::invalid_argument, "trim factor must be positive");
  }
  std::vector<Match> kept = trim_impl(matches, trim_factor);
  if (kept.empty()) {
    throw Error(ErrorCode::all_trimmed, "all matches exceeded the trimming threshold");
  }
  return kept;
}

IcpResult picky_icp(const PointSet& source, const PointSet& target,
                    const RigidTransform& init, const IcpConfig& config) {
  if (source.dim() != target.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "point set dimension mismatch");
  }
  if (config.max_iterations < 1 || config.trim_factor <= 0.0) {
    throw Error(ErrorCode::invalid_argument, "invalid ICP configuration");
  }
  if (!init.translation.allFinite() || !init.rotation.matrix().allFinite()) {
    throw Error(ErrorCode::invalid_argument, "non-finite initial transform");
  }

  const int d = source.dim();
  std::mt19937_64 rng(config.seed);
  RigidTransform current = init;
  std::vector<Match> surviving;
  double prev_msd = std::numeric_limits<double>::infinity();
  double msd = prev_msd;
  int iterations = 0;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    iterations = iter;
    const PointSet moved = apply_transform(current, source);
    const std::vector<Match> raw = nearest_neighbors(moved, target);
    const std::vector<Match> resolved = resolve_multiple_assignments(raw, rng());
    surviving = trim_impl(resolved, config.trim_factor);
    if (static_cast<int>(surviving.size()) < d + 1) {
      throw Error(ErrorCode::non_overlapping_sets,
                  "fewer than d+1 matches survived trimming; sets do not overlap");
    }

    msd = 0.0;
    for (const Match& m : surviving) msd += m.distance * m.distance;
    msd /= static_cast<double>(surviving.size());
    if (msd <= config.convergence_tol ||
        std::abs(prev_msd - msd) <= config.convergence_tol) {
      break;
    }
    prev_msd = msd;

    // Refit on the original, untransformed source coordinates.
    Eigen::MatrixXd x(d, surviving.size());
    Eigen::MatrixXd y(d, surviving.size());
    for (std::size_t k = 0; k < surviving.size(); ++k) {
      x.col(k) = target.points().col(surviving[k].target);
      y.col(k) = source.points().col(surviving[k].source);
    }
    current = umeyama_fit(x, y);
  }

  CorrespondencePair pair;
  pair.i = source.id();
  pair.j = target.id();
  pair.matches.reserve(surviving.size());
  for (const Match& m : surviving) pair.matches.emplace_back(m.source, m.target);
  return {std::move(pair), std::move(current), iterations, msd};
}

CorrespondenceSet build_correspondences(const std::vector<PointSet>& sets,
                                        const std::vector<std::pair<int, int>>& pairing,
                                        const IcpConfig& config) {
  const int m = static_cast<int>(sets.size());
  if (m < 2) {
    throw Error(ErrorCode::invalid_argument, "need at least two point sets");
  }
  std::unordered_set<long long> seen;
  CorrespondenceSet corr;
  corr.m = m;

  for (const auto& [pi, pj] : pairing) {
    int i = pi, j = pj;
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= m || i == j) {
      throw Error(ErrorCode::invalid_argument, "pairing index out of range");
    }
    const long long key = static_cast<long long>(i) * m + j;
    if (!seen.insert(key).second) continue;  // keep the view graph simple

    IcpConfig pair_cfg = config;
    pair_cfg.seed = config.seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(key + 1));
    try {
      IcpResult result = picky_icp(sets[i], sets[j], RigidTransform::identity(sets[i].dim()),
                                   pair_cfg);
      result.pair.i = i;
      result.pair.j = j;
      if (!result.pair.matches.empty()) {
        corr.pairs.push_back(std::move(result.pair));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::non_overlapping_sets) throw;
    }
  }

  // Connectivity of the surviving view graph.
  std::vector<int> component(m);
  for (int i = 0; i < m; ++i) component[i] = i;
  const auto find = [&](int a) {
    while (component[a] != a) a = component[a] = component[component[a]];
    return a;
  };
  for (const CorrespondencePair& p : corr.pairs) {
    component[find(p.i)] = find(p.j);
  }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < m; ++i) groups[find(i)].push_back(i);
  if (groups.size() > 1) {
    std::ostringstream msg;
    msg << "view graph is disconnected; components:";
    for (const auto& [root, members] : groups) {
      msg << " {";
      for (std::size_t k = 0; k < members.size(); ++k) {
        msg << (k ? "," : "") << members[k];
      }
      msg << "}";
    }
    throw Error(ErrorCode::disconnected_graph, msg.str());
  }
  return corr;
}

std::vector<std::pair<int, int>> chain_pairing(int m) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i + 1 < m; ++i) out.emplace_back(i, i + 1);
  return out;
}

std::vector<std::pair<int, int>> all_pairs_pairing(int m) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) out.emplace_back(i, j);
  }
  return out;
}

}  // namespace regalign
