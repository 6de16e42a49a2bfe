#include "nearest.hpp"

#include <cmath>
#include <limits>

#include "fairglvq/error.hpp"

namespace fairglvq::detail {

RowMatrix to_matrix(std::span<const Vector> rows, std::size_t dim) {
    RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim) throw DimensionError("row dimension mismatch");
        for (std::size_t k = 0; k < dim; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return m;
}

NearestSearch::NearestSearch(std::span<const Sample> samples) {
    const std::size_t d = samples.empty() ? 0 : samples.front().features.size();
    points_.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].features.size() != d) throw DimensionError("sample dimension mismatch");
        for (std::size_t k = 0; k < d; ++k)
            points_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = samples[i].features[k];
    }
    norms_ = points_.rowwise().squaredNorm();
}

NearestSearch::NearestSearch(std::span<const Vector> points) {
    const std::size_t d = points.empty() ? 0 : points.front().size();
    points_ = to_matrix(points, d);
    norms_ = points_.rowwise().squaredNorm();
}

void NearestSearch::assign(const RowMatrix& centers, std::vector<std::size_t>& winners,
                           std::vector<double>* distances) const {
    if (centers.cols() != points_.cols()) throw DimensionError("sample dimension does not match model");
    const Eigen::Index n = points_.rows();
    const Eigen::Index k = centers.rows();
    const Eigen::VectorXd center_norms = centers.rowwise().squaredNorm();
    const RowMatrix cross = points_ * centers.transpose();
    winners.assign(static_cast<std::size_t>(n), 0);
    if (distances) distances->assign(static_cast<std::size_t>(n), 0.0);

    for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        double second = best;
        Eigen::Index arg = 0;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double d = center_norms[j] - 2.0 * cross(i, j);
            if (d < best) {
                second = best;
                best = d;
                arg = j;
            } else if (d < second) {
                second = d;
            }
        }
        double exact = best + norms_[i];
        // Expanded distances lose absolute precision ~ eps * |x|^2 + |w|^2.
        const double slack = 1e-9 * (norms_[i] + center_norms.maxCoeff() + 1.0);
        if (k > 1 && second - best <= slack) {
            exact = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < k; ++j) {
                const double d = (points_.row(i) - centers.row(j)).squaredNorm();
                if (d < exact) {
                    exact = d;
                    arg = j;
                }
            }
        }
        winners[static_cast<std::size_t>(i)] = static_cast<std::size_t>(arg);
        if (distances) (*distances)[static_cast<std::size_t>(i)] = std::max(0.0, exact);
    }
}

}  // namespace fairglvq::detail
