#include "semeq/equalize.hpp"
#include "semeq/rng.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace semeq {
namespace {

// Squared distances from every point to every centroid (n x k).
Matrix squared_distances(const Matrix& points, const Vector& point_norms, const Matrix& centroids) {
  Matrix d = -2.0 * points * centroids.transpose();
  d.colwise() += point_norms;
  d.rowwise() += centroids.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

Matrix kmeans_plus_plus(const Matrix& points, Index k, Rng& rng) {
  const Index n = points.rows();
  Matrix centroids(k, points.cols());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  centroids.row(0) = points.row(pick(rng));

  Vector nearest = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (Index c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Index chosen = 0;
    if (total <= 0.0) {
      chosen = pick(rng);
    } else {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      chosen = n - 1;
      for (Index i = 0; i < n; ++i) {
        target -= nearest(i);
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centroids.row(c) = points.row(chosen);
    const Vector dist = (points.rowwise() - centroids.row(c)).rowwise().squaredNorm();
    nearest = nearest.cwiseMin(dist);
  }
  return centroids;
}

std::vector<Index> assign(const Matrix& distances, Vector& best) {
  const Index n = distances.rows();
  std::vector<Index> labels(static_cast<std::size_t>(n));
  best.resize(n);
  for (Index i = 0; i < n; ++i) {
    Index arg = 0;
    best(i) = distances.row(i).minCoeff(&arg);
    labels[static_cast<std::size_t>(i)] = arg;
  }
  return labels;
}

// Moves the point farthest from its own centroid into each empty cluster.
void fill_empty_clusters(std::vector<Index>& labels, Vector& best, std::vector<Index>& counts) {
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0) continue;
    Index far = -1;
    double far_dist = -1.0;
    for (Index i = 0; i < best.size(); ++i) {
      const auto owner = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
      if (counts[owner] > 1 && best(i) > far_dist) {
        far = i;
        far_dist = best(i);
      }
    }
    if (far < 0) break;
    --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
    labels[static_cast<std::size_t>(far)] = static_cast<Index>(c);
    best(far) = 0.0;
    counts[c] = 1;
  }
}

}  // namespace

std::string_view to_string(AnchorStrategy s) {
  return s == AnchorStrategy::prototypical ? "prototypical" : "uniform";
}

AnchorStrategy parse_anchor_strategy(std::string_view name) {
  if (name == "prototypical" || name == "proto") return AnchorStrategy::prototypical;
  if (name == "uniform") return AnchorStrategy::uniform;
  throw InvalidInput("unknown anchor strategy '" + std::string(name) + "'");
}

KMeansResult kmeans(const Matrix& points, Index k, std::uint64_t seed, int max_iterations,
                    double tolerance) {
  const Index n = points.rows();
  if (k < 1 || k > n) {
    throw InvalidInput("kmeans: need 1 <= k <= n, got k=" + std::to_string(k) +
                       ", n=" + std::to_string(n));
  }
  Rng rng = make_rng(seed, Stream::kmeans);
  const Vector norms = points.rowwise().squaredNorm();

  KMeansResult out;
  out.centroids = kmeans_plus_plus(points, k, rng);
  Vector best;
  std::vector<Index> counts(static_cast<std::size_t>(k));

  for (int it = 0; it < max_iterations; ++it) {
    out.labels = assign(squared_distances(points, norms, out.centroids), best);
    std::fill(counts.begin(), counts.end(), 0);
    for (Index l : out.labels) ++counts[static_cast<std::size_t>(l)];
    fill_empty_clusters(out.labels, best, counts);

    Matrix next = Matrix::Zero(k, points.cols());
    for (Index i = 0; i < n; ++i) next.row(out.labels[static_cast<std::size_t>(i)]) += points.row(i);
    for (Index c = 0; c < k; ++c) next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    const double shift = (next - out.centroids).rowwise().norm().maxCoeff();
    out.centroids = std::move(next);
    out.iterations = it + 1;
    if (shift <= tolerance) {
      out.converged = true;
      break;
    }
  }
  // Final labels consistent with the returned centroids.
  out.labels = assign(squared_distances(points, norms, out.centroids), best);
  std::fill(counts.begin(), counts.end(), 0);
  for (Index l : out.labels) ++counts[static_cast<std::size_t>(l)];
  fill_empty_clusters(out.labels, best, counts);
  return out;
}

Matrix anchors_from_support(const Matrix& embeddings, const SupportSets& support) {
  if (support.empty()) throw InvalidInput("anchors_from_support: empty support family");
  Matrix anchors = Matrix::Zero(static_cast<Index>(support.size()), embeddings.cols());
  for (std::size_t a = 0; a < support.size(); ++a) {
    const auto& set = support[a];
    if (set.empty()) throw InvalidInput("anchors_from_support: empty support set " + std::to_string(a));
    for (Index i : set) {
      if (i < 0 || i >= embeddings.rows()) {
        throw InvalidInput("anchors_from_support: index " + std::to_string(i) + " out of range");
      }
      anchors.row(static_cast<Index>(a)) += embeddings.row(i);
    }
    anchors.row(static_cast<Index>(a)) /= static_cast<double>(set.size());
  }
  return anchors;
}

AnchorSelection prototypical_anchors(const Matrix& embeddings, SupportSets support) {
  AnchorSelection out;
  out.anchors = anchors_from_support(embeddings, support);
  out.support = std::move(support);
  return out;
}

AnchorSelection prototypical_anchors(const Matrix& embeddings, const AnchorSpec& spec) {
  if (spec.count < 1 || spec.per_cluster < 1) {
    throw InvalidInput("prototypical_anchors: N and M must be positive");
  }
  if (spec.count > embeddings.rows()) {
    throw InvalidInput("prototypical_anchors: N=" + std::to_string(spec.count) + " exceeds " +
                       std::to_string(embeddings.rows()) + " samples");
  }
  const KMeansResult clusters = kmeans(embeddings, spec.count, spec.seed);

  std::vector<std::vector<Index>> members(static_cast<std::size_t>(spec.count));
  for (Index i = 0; i < embeddings.rows(); ++i) {
    members[static_cast<std::size_t>(clusters.labels[static_cast<std::size_t>(i)])].push_back(i);
  }

  Rng rng = make_rng(spec.seed, Stream::anchors, static_cast<std::uint64_t>(spec.count));
  SupportSets support(members.size());
  Index shrunk = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& pool = members[c];
    const auto take = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(spec.per_cluster));
    if (take < static_cast<std::size_t>(spec.per_cluster)) ++shrunk;
    // Partial Fisher-Yates: the first `take` entries are a uniform draw
    // without replacement.
    for (std::size_t j = 0; j < take; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
      std::swap(pool[j], pool[pick(rng)]);
    }
    support[c].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(support[c].begin(), support[c].end());
  }
  if (shrunk > 0) {
    spdlog::debug("prototypical_anchors: {} of {} clusters had fewer than M={} members", shrunk,
                  spec.count, spec.per_cluster);
  }
  return prototypical_anchors(embeddings, std::move(support));
}

AnchorSelection uniform_anchors(const Matrix& embeddings, Index count, std::uint64_t seed) {
  if (count < 1 || count > embeddings.rows()) {
    throw InvalidInput("uniform_anchors: N=" + std::to_string(count) + " not in [1, " +
                       std::to_string(embeddings.rows()) + "]");
  }
  std::vector<Index> order(static_cast<std::size_t>(embeddings.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng = make_rng(seed, Stream::anchors, static_cast<std::uint64_t>(count));
  for (std::size_t j = 0; j < static_cast<std::size_t>(count); ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, order.size() - 1);
    std::swap(order[j], order[pick(rng)]);
  }
  SupportSets support;
  support.reserve(static_cast<std::size_t>(count));
  for (std::size_t j = 0; j < static_cast<std::size_t>(count); ++j) support.push_back({order[j]});
  return prototypical_anchors(embeddings, std::move(support));
}

AnchorSelection select_anchors(const Matrix& embeddings, const AnchorSpec& spec) {
  if (spec.strategy == AnchorStrategy::uniform) {
    return uniform_anchors(embeddings, spec.count, spec.seed);
  }
  return prototypical_anchors(embeddings, spec);
}

}  // namespace semeq
