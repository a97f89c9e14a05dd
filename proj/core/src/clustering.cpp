#include "substate/clustering.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "substate/errors.hpp"
#include "substate/parallel.hpp"
#include "substate/rng.hpp"

namespace substate {

KPolicy KPolicy::fixed(std::size_t k) {
  if (k < 2) throw InputError(fmt::format("fixed k must be >= 2 (got {})", k));
  KPolicy p;
  p.k_ = k;
  return p;
}

KPolicy KPolicy::percent(double pct) {
  if (!(pct > 0.0 && pct <= 100.0)) {
    throw InputError(fmt::format("k percentage must be in (0, 100] (got {})", pct));
  }
  KPolicy p;
  p.percent_ = true;
  p.p_ = pct;
  return p;
}

KPolicy KPolicy::parse(std::string_view spec) {
  auto trimmed = spec;
  while (!trimmed.empty() && trimmed.front() == ' ') trimmed.remove_prefix(1);
  while (!trimmed.empty() && trimmed.back() == ' ') trimmed.remove_suffix(1);
  if (trimmed.starts_with("k@")) trimmed.remove_prefix(2);
  if (trimmed.empty()) throw InputError("empty k spec");

  if (trimmed.back() == '%') {
    trimmed.remove_suffix(1);
    // std::from_chars for double is missing from older libstdc++.
    std::string text(trimmed);
    char* end = nullptr;
    const double pct = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
      throw InputError("bad k percentage '" + std::string(spec) + "'");
    }
    return percent(pct);
  }
  std::size_t k = 0;
  const auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), k);
  if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size()) {
    throw InputError("bad k spec '" + std::string(spec) + "' (expected e.g. 2 or 0.5%)");
  }
  return fixed(k);
}

std::string KPolicy::spec() const {
  if (percent_) return fmt::format("{}%", p_);
  return std::to_string(k_);
}

std::size_t choose_k(std::size_t n, const KPolicy& policy) {
  if (n == 0) return 0;
  if (!policy.is_percent()) return std::min(policy.fixed_k(), n);
  const double raw = policy.percentage() * static_cast<double>(n) / 100.0;
  const auto rounded = static_cast<std::size_t>(std::floor(raw + 0.5));
  return std::min(n, std::max<std::size_t>(2, rounded));
}

namespace {

using Point = std::vector<double>;

double squared_distance(const Point& a, const Point& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

// Index of the nearest centroid; the lowest index wins ties.
std::size_t nearest(const Point& p, const std::vector<Point>& centroids, double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

std::size_t weighted_draw(Rng& rng, const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double r = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    if (r < weights[i]) return i;
    r -= weights[i];
  }
  // Rounding left r just past the end: take the last eligible point.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

constexpr std::size_t kMaxIterations = 100;
constexpr double kShiftTolerance = 1e-9;
constexpr std::size_t kInitializations = 10;

struct Lloyd {
  std::vector<std::size_t> label;  // per weighted point
  std::size_t clusters = 0;
  double inertia = 0.0;  // weighted within-cluster sum of squares
};

// One k-means++ initialization followed by Lloyd iterations.
Lloyd lloyd(const std::vector<Point>& points, const std::vector<double>& weight, std::size_t k,
            Rng& rng) {
  const std::size_t m = points.size();
  const std::size_t dims = points.front().size();

  // First centre by weight, then by weight * D^2.
  std::vector<Point> centroids;
  centroids.reserve(k);
  centroids.push_back(points[weighted_draw(rng, weight)]);
  std::vector<double> d2(m);
  while (centroids.size() < k) {
    std::vector<double> w(m);
    for (std::size_t u = 0; u < m; ++u) {
      nearest(points[u], centroids, &d2[u]);
      w[u] = weight[u] * d2[u];
    }
    if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) break;
    centroids.push_back(points[weighted_draw(rng, w)]);
  }

  Lloyd out;
  out.label.assign(m, 0);
  for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
    for (std::size_t u = 0; u < m; ++u) out.label[u] = nearest(points[u], centroids);

    std::vector<Point> sums(centroids.size(), Point(dims, 0.0));
    std::vector<double> mass(centroids.size(), 0.0);
    for (std::size_t u = 0; u < m; ++u) {
      mass[out.label[u]] += weight[u];
      for (std::size_t j = 0; j < dims; ++j) sums[out.label[u]][j] += weight[u] * points[u][j];
    }
    std::vector<Point> next;
    double shift = 0.0;
    bool dropped = false;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (mass[c] == 0.0) {
        dropped = true;
        continue;
      }
      for (double& v : sums[c]) v /= mass[c];
      shift = std::max(shift, std::sqrt(squared_distance(sums[c], centroids[c])));
      next.push_back(std::move(sums[c]));
    }
    centroids = std::move(next);
    if (!dropped && shift < kShiftTolerance) break;
  }
  for (std::size_t u = 0; u < m; ++u) {
    double d = 0.0;
    out.label[u] = nearest(points[u], centroids, &d);
    out.inertia += weight[u] * d;
  }
  out.clusters = centroids.size();
  return out;
}

}  // namespace

KMeansResult kmeans(std::span<const FeatureVector> vectors, std::size_t k, std::uint64_t seed) {
  KMeansResult result;
  const std::size_t n = vectors.size();
  result.assignment.assign(n, 0);
  if (n == 0) return result;
  if (k == 0) throw InputError("kmeans needs k >= 1");

  // Collapse exact duplicates into weighted points, keeping input order.
  std::map<std::array<double, kFeatureCount>, std::size_t> unique_index;
  std::vector<std::array<double, kFeatureCount>> unique;
  std::vector<double> weight;
  std::vector<std::size_t> point_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto key = vectors[i].as_array();
    for (double v : key) {
      if (!std::isfinite(v)) throw InvariantError("kmeans input must be finite");
    }
    auto [it, inserted] = unique_index.try_emplace(key, unique.size());
    if (inserted) {
      unique.push_back(key);
      weight.push_back(0.0);
    }
    weight[it->second] += 1.0;
    point_of[i] = it->second;
  }

  // z-score each dimension over all n vectors; drop constant dimensions.
  const auto total = static_cast<double>(n);
  std::vector<std::size_t> dims;
  std::vector<double> mu;
  std::vector<double> sigma;
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    double mean = 0.0;
    for (std::size_t u = 0; u < unique.size(); ++u) mean += weight[u] * unique[u][d];
    mean /= total;
    double var = 0.0;
    for (std::size_t u = 0; u < unique.size(); ++u) {
      const double t = unique[u][d] - mean;
      var += weight[u] * t * t;
    }
    var /= total;
    if (var > 0.0 && std::isfinite(var)) {
      dims.push_back(d);
      mu.push_back(mean);
      sigma.push_back(std::sqrt(var));
    }
  }

  const std::size_t m = unique.size();
  if (dims.empty() || m == 1) {
    result.clusters = 1;
    return result;
  }

  std::vector<Point> points(m, Point(dims.size()));
  for (std::size_t u = 0; u < m; ++u) {
    for (std::size_t j = 0; j < dims.size(); ++j) {
      points[u][j] = (unique[u][dims[j]] - mu[j]) / sigma[j];
    }
  }

  const std::size_t kk = std::min(k, m);
  Rng rng = make_rng(seed);
  Lloyd best = lloyd(points, weight, kk, rng);
  for (std::size_t run = 1; run < kInitializations; ++run) {
    Lloyd next = lloyd(points, weight, kk, rng);
    if (next.inertia < best.inertia * (1.0 - 1e-12)) best = std::move(next);
  }
  const std::vector<std::size_t>& label = best.label;
  const std::size_t found = best.clusters;

  // Renumber clusters by first appearance in input order.
  std::vector<std::size_t> renumber(found, std::numeric_limits<std::size_t>::max());
  std::size_t next_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& id = renumber[label[point_of[i]]];
    if (id == std::numeric_limits<std::size_t>::max()) id = next_id++;
    result.assignment[i] = id;
  }
  result.clusters = next_id;
  return result;
}

ChannelClusters cluster_channel(const ChannelKey& channel,
                                std::span<const ChannelObservation> observations,
                                const KPolicy& policy, std::uint64_t seed) {
  ChannelClusters out;
  out.channel = channel;

  std::vector<const ChannelObservation*> normal;
  for (const auto& obs : observations) {
    if (obs.nan) {
      out.nan_bucket.push_back(obs.test);
    } else if (obs.inf) {
      out.inf_bucket.push_back(obs.test);
    } else {
      if (!obs.features) throw InvariantError("unflagged observation without features");
      normal.push_back(&obs);
    }
  }
  std::sort(out.nan_bucket.begin(), out.nan_bucket.end());
  std::sort(out.inf_bucket.begin(), out.inf_bucket.end());
  if (normal.empty()) return out;

  std::sort(normal.begin(), normal.end(), [](const auto* a, const auto* b) {
    const auto fa = a->features->as_array();
    const auto fb = b->features->as_array();
    if (fa != fb) return fa < fb;
    return a->test < b->test;
  });
  std::vector<FeatureVector> vectors;
  vectors.reserve(normal.size());
  for (const auto* obs : normal) vectors.push_back(*obs->features);

  const std::size_t k = choose_k(vectors.size(), policy);
  const KMeansResult km = kmeans(vectors, k, mix_seed(seed, fnv1a64(channel.id())));

  out.clusters.assign(km.clusters, {});
  for (std::size_t i = 0; i < normal.size(); ++i) {
    out.clusters[km.assignment[i]].push_back(normal[i]->test);
  }
  for (auto& c : out.clusters) std::sort(c.begin(), c.end());
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

ChannelTable build_channel_table(const SuiteTraces& suite, unsigned jobs) {
  ChannelTable table;
  table.test_ids = suite.test_ids;

  std::unordered_map<ChannelKey, std::size_t, ChannelKeyHash> index;
  struct Slot {
    std::size_t channel;
    std::size_t test;
    const StreamSummary* summary;
  };
  std::vector<Slot> slots;
  for (std::size_t t = 0; t < suite.traces.size(); ++t) {
    for (const auto& [key, summary] : suite.traces[t].channels()) {
      auto [it, inserted] = index.try_emplace(key, table.channels.size());
      if (inserted) table.channels.push_back(key);
      slots.push_back({it->second, t, &summary});
    }
  }

  std::vector<ChannelObservation> computed(slots.size());
  parallel_for(slots.size(), jobs, [&](std::size_t i) {
    const auto& slot = slots[i];
    ChannelObservation obs;
    obs.test = slot.test;
    obs.nan = slot.summary->nan_seen();
    obs.inf = slot.summary->inf_seen();
    if (!obs.nan && !obs.inf) obs.features = extract_features(*slot.summary);
    computed[i] = std::move(obs);
  });

  table.observations.resize(table.channels.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    table.observations[slots[i].channel].push_back(std::move(computed[i]));
  }
  return table;
}

std::vector<ChannelClusters> cluster_table(const ChannelTable& table, const KPolicy& policy,
                                           std::uint64_t seed, unsigned jobs) {
  std::vector<ChannelClusters> out(table.channels.size());
  parallel_for(table.channels.size(), jobs, [&](std::size_t c) {
    out[c] = cluster_channel(table.channels[c], table.observations[c], policy, seed);
  });
  return out;
}

}  // namespace substate
