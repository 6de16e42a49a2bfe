#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fairglvq/data.hpp"
#include "fairglvq/model.hpp"

namespace fairglvq::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Batched winner search over a fixed point set. Distances come from
/// |x|^2 - 2 x.w + |w|^2 via one matrix product; rows whose best and
/// runner-up are within rounding of each other are re-resolved with exact
/// squared differences so the result matches a plain argmin (lowest index
/// on ties).
class NearestSearch {
public:
    explicit NearestSearch(std::span<const Sample> samples);
    explicit NearestSearch(std::span<const Vector> points);

    std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }

    // centers: k x d, one row per prototype / centre. Writes winner indices
    // and (optionally) exact-or-expanded squared distances.
    void assign(const RowMatrix& centers, std::vector<std::size_t>& winners,
                std::vector<double>* distances = nullptr) const;

private:
    RowMatrix points_;
    Eigen::VectorXd norms_;
};

RowMatrix prototype_matrix(const PrototypeModel& model);
RowMatrix to_matrix(std::span<const Vector> rows, std::size_t dim);

}  // namespace fairglvq::detail
