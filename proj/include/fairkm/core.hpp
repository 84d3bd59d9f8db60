#pragma once

#include "fairkm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fairkm {

using Label = std::int32_t;

/// Dense row-major matrix of doubles.
class Matrix
{
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
    : rows_(rows)
    , cols_(cols)
    , data_(rows * cols, fill)
  {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows)
    , cols_(cols)
    , data_(std::move(data))
  {
    if (data_.size() != rows_ * cols_)
    {
      throw InvalidInput("Matrix: data size does not match shape");
    }
  }

  static Matrix from_rows(std::vector<std::vector<double>> const &rows)
  {
    std::size_t const cols = rows.empty() ? 0 : rows.front().size();
    Matrix            m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
      if (rows[i].size() != cols)
      {
        throw InvalidInput("Matrix: row " + std::to_string(i) + " has " +
                           std::to_string(rows[i].size()) + " values, expected " +
                           std::to_string(cols));
      }
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] bool        empty() const { return data_.empty(); }

  double       &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double const &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double>       row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<double const> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> const &data() const { return data_; }
  std::vector<double>       &data() { return data_; }

  friend bool operator==(Matrix const &, Matrix const &) = default;

private:
  std::size_t         rows_{0};
  std::size_t         cols_{0};
  std::vector<double> data_;
};

inline double squared_distance(std::span<double const> a, std::span<double const> b)
{
  double s = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f)
  {
    double const diff = a[f] - b[f];
    s += diff * diff;
  }
  return s;
}

/// One sensitive attribute: named protected groups and the group index of every object.
struct SensitiveFeature
{
  std::string               name;
  std::vector<std::string>  groups;
  std::vector<std::int32_t> membership;

  [[nodiscard]] std::size_t group_count() const { return groups.size(); }
};

/// Immutable set of n objects with d non-sensitive features and one or more
/// sensitive features. Object indices are stable and used for all tie-breaking.
class Dataset
{
public:
  Dataset(Matrix points, std::vector<SensitiveFeature> features)
    : points_(std::move(points))
    , features_(std::move(features))
  {
    validate();
  }

  [[nodiscard]] std::size_t   n() const { return points_.rows(); }
  [[nodiscard]] std::size_t   d() const { return points_.cols(); }
  [[nodiscard]] Matrix const &points() const { return points_; }

  [[nodiscard]] std::vector<SensitiveFeature> const &features() const { return features_; }
  [[nodiscard]] SensitiveFeature const              &feature(std::size_t s) const
  {
    if (s >= features_.size())
    {
      throw InvalidInput("sensitive feature index " + std::to_string(s) + " out of range");
    }
    return features_[s];
  }
  [[nodiscard]] std::size_t feature_count() const { return features_.size(); }

private:
  void validate() const
  {
    if (points_.rows() == 0 || points_.cols() == 0)
    {
      throw InvalidInput("dataset needs at least one object and one non-sensitive feature");
    }
    for (std::size_t i = 0; i < points_.rows(); ++i)
    {
      for (std::size_t f = 0; f < points_.cols(); ++f)
      {
        if (!std::isfinite(points_(i, f)))
        {
          throw InvalidInput("non-finite value at row " + std::to_string(i) + ", column " +
                             std::to_string(f));
        }
      }
    }
    if (features_.empty())
    {
      throw InvalidInput("dataset needs at least one sensitive feature");
    }
    for (auto const &feat : features_)
    {
      if (feat.groups.size() < 2)
      {
        throw InvalidInput("sensitive feature '" + feat.name + "' needs at least two groups");
      }
      if (feat.membership.size() != points_.rows())
      {
        throw InvalidInput("sensitive feature '" + feat.name + "' labels " +
                           std::to_string(feat.membership.size()) + " objects, expected " +
                           std::to_string(points_.rows()));
      }
      std::vector<bool> seen(feat.groups.size(), false);
      for (std::size_t i = 0; i < feat.membership.size(); ++i)
      {
        auto const g = feat.membership[i];
        if (g < 0 || static_cast<std::size_t>(g) >= feat.groups.size())
        {
          throw InvalidInput("sensitive feature '" + feat.name + "': object " +
                             std::to_string(i) + " has invalid group index");
        }
        seen[static_cast<std::size_t>(g)] = true;
      }
      for (std::size_t g = 0; g < seen.size(); ++g)
      {
        if (!seen[g])
        {
          throw InvalidInput("sensitive feature '" + feat.name + "': group '" + feat.groups[g] +
                             "' is empty");
        }
      }
    }
  }

  Matrix                        points_;
  std::vector<SensitiveFeature> features_;
};

/// Column-wise min-max scaling to [0,1]; constant columns map to 0.
inline Matrix scale_minmax(Matrix const &raw)
{
  Matrix out(raw.rows(), raw.cols());
  for (std::size_t f = 0; f < raw.cols(); ++f)
  {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < raw.rows(); ++i)
    {
      double const v = raw(i, f);
      if (!std::isfinite(v))
      {
        throw InvalidInput("scale_minmax: non-finite value at row " + std::to_string(i) +
                           ", column " + std::to_string(f));
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    double const range = hi - lo;
    for (std::size_t i = 0; i < raw.rows(); ++i)
    {
      out(i, f) = range > 0.0 ? (raw(i, f) - lo) / range : 0.0;
    }
  }
  return out;
}

/// Number of objects per protected group of feature `s`, indexed like feature(s).groups.
inline std::vector<std::int64_t> group_counts(Dataset const &data, std::size_t s)
{
  auto const               &feat = data.feature(s);
  std::vector<std::int64_t> counts(feat.groups.size(), 0);
  for (auto g : feat.membership)
  {
    ++counts[static_cast<std::size_t>(g)];
  }
  return counts;
}

}  // namespace fairkm
