#pragma once

#include "lcdl/model.hpp"

namespace lcdl {

/// Similarity M, degree T and Laplacian L = T - M over the atoms of a
/// dictionary.
struct LaplacianBundle {
  Matrix similarity;
  Matrix degree;
  Matrix laplacian;
};

namespace graph {

/// Symmetrized kNN heat-kernel similarity between atom columns.
///
/// The raw entry M_ij is exp(-||d_i - d_j|| / delta) when d_j is one of the
/// knn_k nearest atoms of d_i (self excluded, ties broken by lower index) and
/// zero otherwise. The result is (M + M^T) / 2 with a zero diagonal.
Matrix knn_similarity(const Matrix& atoms, int knn_k, double delta);
Matrix knn_similarity(const Dictionary& dict, int knn_k, double delta);

/// Mean Euclidean distance over all unordered atom pairs; the default
/// bandwidth. Returns 1 when there are fewer than two atoms or every pair
/// coincides.
double mean_pairwise_distance(const Matrix& atoms);

LaplacianBundle laplacian(const Matrix& similarity);

/// Convenience: similarity followed by laplacian, resolving an unset delta
/// to mean_pairwise_distance.
LaplacianBundle build(const Dictionary& dict, int knn_k,
                      std::optional<double> delta);

/// tr(Z^T L Z).
double locality_energy(const CodingMatrix& codes, const Matrix& laplacian);

}  // namespace graph
}  // namespace lcdl
