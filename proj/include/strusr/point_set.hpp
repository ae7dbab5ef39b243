#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace strusr {

/// Immutable set of points in R^d, kept both row-major (one point per row)
/// and column-major (one coordinate per column) for batch evaluation.
class PointSet {
public:
    PointSet() = default;

    PointSet(std::size_t dimension, std::vector<double> row_major)
        : dim_(dimension), rows_(std::move(row_major))
    {
        if (dim_ == 0) throw std::invalid_argument("PointSet: dimension must be positive");
        if (rows_.size() % dim_ != 0) throw std::invalid_argument("PointSet: data size is not a multiple of dimension");
        n_ = rows_.size() / dim_;
        cols_.resize(rows_.size());
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t a = 0; a < dim_; ++a) cols_[a * n_ + i] = rows_[i * dim_ + a];
        }
    }

    static PointSet from_points(std::size_t dimension, const std::vector<std::vector<double>>& points)
    {
        std::vector<double> data;
        data.reserve(points.size() * dimension);
        for (const auto& p : points) {
            if (p.size() != dimension) throw std::invalid_argument("PointSet: point has wrong dimension");
            data.insert(data.end(), p.begin(), p.end());
        }
        return PointSet(dimension, std::move(data));
    }

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    std::span<const double> point(std::size_t i) const { return {rows_.data() + i * dim_, dim_}; }
    std::span<const double> column(std::size_t axis) const { return {cols_.data() + axis * n_, n_}; }

    /// First n points (all of them when n >= size()).
    PointSet head(std::size_t n) const
    {
        if (n >= n_) return *this;
        return PointSet(dim_, std::vector<double>(rows_.begin(), rows_.begin() + static_cast<std::ptrdiff_t>(n * dim_)));
    }

    const std::vector<double>& row_major() const { return rows_; }

private:
    std::size_t dim_ = 0;
    std::size_t n_ = 0;
    std::vector<double> rows_;
    std::vector<double> cols_;
};

}  // namespace strusr
