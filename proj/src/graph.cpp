#include "lcdl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace lcdl::graph {

namespace {

Matrix pairwise_distances(const Matrix& atoms) {
  const Eigen::Index k = atoms.cols();
  Matrix dist = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double d = (atoms.col(i) - atoms.col(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

}  // namespace

Matrix knn_similarity(const Matrix& atoms, int knn_k, double delta) {
  const Eigen::Index k = atoms.cols();
  if (knn_k < 1 || knn_k > k - 1) {
    throw Error(ErrorCode::KTooLarge,
                "knn_k = " + std::to_string(knn_k) + " with " +
                    std::to_string(k) + " atoms");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::NonPositiveDelta, "delta must be positive");
  }

  const Matrix dist = pairwise_distances(atoms);
  Matrix raw = Matrix::Zero(k, k);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k - 1));
  for (Eigen::Index i = 0; i < k; ++i) {
    order.clear();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j != i) order.push_back(j);
    }
    // Stable sort on distance keeps lower indices first among ties.
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return dist(i, a) < dist(i, b);
                     });
    for (int n = 0; n < knn_k; ++n) {
      const Eigen::Index j = order[static_cast<std::size_t>(n)];
      raw(i, j) = std::exp(-dist(i, j) / delta);
    }
  }

  Matrix sym(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      sym(i, j) = i == j ? 0.0 : 0.5 * (raw(i, j) + raw(j, i));
    }
  }
  return sym;
}

Matrix knn_similarity(const Dictionary& dict, int knn_k, double delta) {
  return knn_similarity(dict.atoms, knn_k, delta);
}

double mean_pairwise_distance(const Matrix& atoms) {
  const Eigen::Index k = atoms.cols();
  if (k < 2) return 1.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      sum += (atoms.col(i) - atoms.col(j)).norm();
    }
  }
  const double mean = sum / (0.5 * static_cast<double>(k) * static_cast<double>(k - 1));
  return mean > 0.0 ? mean : 1.0;
}

LaplacianBundle laplacian(const Matrix& similarity) {
  const Eigen::Index k = similarity.rows();
  if (similarity.cols() != k) {
    throw Error(ErrorCode::DimensionMismatch, "similarity must be square");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (similarity(i, j) != similarity(j, i)) {
        throw Error(ErrorCode::AsymmetricInput,
                    "similarity(" + std::to_string(i) + ", " +
                        std::to_string(j) + ") differs from its transpose");
      }
      if (similarity(i, j) < 0.0 || !std::isfinite(similarity(i, j))) {
        throw Error(ErrorCode::NegativeSimilarity,
                    "similarity(" + std::to_string(i) + ", " +
                        std::to_string(j) + ") is negative or not finite");
      }
    }
  }

  LaplacianBundle out;
  out.similarity = similarity;
  out.similarity.diagonal().setZero();
  out.degree = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.degree(i, i) = out.similarity.row(i).sum();
  }
  out.laplacian = out.degree - out.similarity;
  return out;
}

LaplacianBundle build(const Dictionary& dict, int knn_k,
                      std::optional<double> delta) {
  const double bandwidth = delta ? *delta : mean_pairwise_distance(dict.atoms);
  return laplacian(knn_similarity(dict.atoms, knn_k, bandwidth));
}

double locality_energy(const CodingMatrix& codes, const Matrix& laplacian) {
  if (laplacian.rows() != laplacian.cols() || laplacian.rows() != codes.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "Laplacian is " + std::to_string(laplacian.rows()) + "x" +
                    std::to_string(laplacian.cols()) + " but codes have " +
                    std::to_string(codes.rows()) + " rows");
  }
  return (codes.array() * (laplacian * codes).array()).sum();
}

}  // namespace lcdl::graph
