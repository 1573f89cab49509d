#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "treegap/error.hpp"
#include "treegap/tree.hpp"

namespace treegap {

/// Distance matrix of a finite metric space, validated on construction.
class FiniteMetric {
 public:
  FiniteMetric(std::vector<VertexId> labels, Eigen::MatrixXd dist)
      : labels_(std::move(labels)), dist_(std::move(dist)) {
    const auto n = static_cast<Eigen::Index>(labels_.size());
    if (n == 0) throw Error(ErrorCode::InvalidMetric, "empty metric space");
    if (dist_.rows() != n || dist_.cols() != n) {
      throw Error(ErrorCode::SizeMismatch, "distance matrix is " + std::to_string(dist_.rows()) +
                                               "x" + std::to_string(dist_.cols()) + " for " +
                                               std::to_string(n) + " labels");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!index_.emplace(labels_[i], i).second) {
        throw Error(ErrorCode::DuplicateVertex, "label '" + labels_[i] + "' listed twice");
      }
    }
    const double scale = std::max(1.0, dist_.cwiseAbs().maxCoeff());
    const double slack = 1e-12 * scale;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (dist_(i, i) != 0.0) throw Error(ErrorCode::InvalidMetric, "nonzero diagonal entry");
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(dist_(i, j))) throw Error(ErrorCode::InvalidMetric, "non-finite distance");
        if (dist_(i, j) != dist_(j, i)) throw Error(ErrorCode::InvalidMetric, "matrix is not symmetric");
        if (i != j && !(dist_(i, j) > 0.0)) {
          throw Error(ErrorCode::InvalidMetric, "distinct points at distance zero");
        }
      }
    }
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
          if (dist_(i, j) > dist_(i, k) + dist_(k, j) + slack) {
            throw Error(ErrorCode::InvalidMetric, "triangle inequality fails at (" + labels_[i] +
                                                      ", " + labels_[k] + ", " + labels_[j] + ")");
          }
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<VertexId>& labels() const { return labels_; }
  const Eigen::MatrixXd& matrix() const { return dist_; }
  double operator()(std::size_t i, std::size_t j) const {
    return dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  std::optional<std::size_t> find(const VertexId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(const VertexId& id) const {
    auto i = find(id);
    if (!i) throw Error(ErrorCode::UnknownVertex, "point '" + id + "' is not in the metric");
    return *i;
  }

  /// Shortest and longest nonzero distances; (0, 0) for a single point.
  std::pair<double, double> distance_range() const {
    if (size() < 2) return {0.0, 0.0};
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) {
        lo = std::min(lo, (*this)(i, j));
        hi = std::max(hi, (*this)(i, j));
      }
    return {lo, hi};
  }

  FiniteMetric scaled(double factor) const { return FiniteMetric(labels_, dist_ * factor); }

 private:
  std::vector<VertexId> labels_;
  Eigen::MatrixXd dist_;
  std::map<VertexId, std::size_t> index_;
};

/// Path metric of `tree`, restricted to `subset` when given (in that order).
inline FiniteMetric metric_from_tree(const MetricTree& tree,
                                     const std::optional<std::vector<VertexId>>& subset = std::nullopt) {
  std::vector<std::size_t> idx;
  if (subset) {
    for (const auto& id : *subset) idx.push_back(tree.index_of(id));
  } else {
    for (std::size_t v = 0; v < tree.size(); ++v) idx.push_back(v);
  }
  std::vector<VertexId> labels;
  for (std::size_t v : idx) labels.push_back(tree.label(v));
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = tree.distance(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return FiniteMetric(std::move(labels), std::move(d));
}

}  // namespace treegap
