#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lcdl/error.hpp"

namespace lcdl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Features are stored with samples as columns (m rows, n columns).
using FeatureMatrix = Matrix;

/// K × n coefficients; column i codes sample i, row j is the profile of atom j.
using CodingMatrix = Matrix;

/// Class labels are dense and 1-based.
using Labels = std::vector<int>;

struct LabeledDataset {
  FeatureMatrix features;
  Labels labels;
  int num_classes = 0;

  Eigen::Index dim() const { return features.rows(); }
  Eigen::Index size() const { return features.cols(); }
};

/// Atom matrix with unit-norm columns, grouped by class (atom_labels is
/// non-decreasing).
struct Dictionary {
  Matrix atoms;
  Labels atom_labels;

  Eigen::Index dim() const { return atoms.rows(); }
  Eigen::Index size() const { return atoms.cols(); }
  int num_classes() const;
};

struct HyperParams {
  double lambda1 = 1e-3;  // locality weight
  double lambda2 = 1e-6;  // SVM weight
  double theta = 0.2;     // squared-hinge penalty
  double eta1 = 1e-2;     // projector ridge
  double eta2 = 5.0;      // residual/SVM fusion weight
  int atoms_per_class = 10;
  int knn_k = 5;
  /// Heat-kernel bandwidth; unset means the mean pairwise atom distance of
  /// the dictionary the graph is built from.
  std::optional<double> delta;
  int max_iters = 15;
  /// Dictionary-update ridge; unset means 1e-10 * trace(Z Z^T) / K.
  std::optional<double> ridge_eps;
  std::uint64_t seed = 0;
};

/// Throws Error(InvalidParameter) when a weight is negative or non-finite or a
/// count is non-positive. `num_atoms`, when known, also checks knn_k <= K - 1.
void validate_params(const HyperParams& params,
                     std::optional<Eigen::Index> num_atoms = std::nullopt);

/// Throws the first violated LabeledDataset invariant: LengthMismatch,
/// ClassOutOfRange, NonFiniteEntry(row, col) or EmptyClass(c).
void validate_dataset(const LabeledDataset& ds);

/// +1 where labels[i] == c, -1 elsewhere.
Vector one_vs_all_targets(const Labels& labels, int c, int num_classes);

/// Indices of the columns belonging to class c, in ascending order.
std::vector<Eigen::Index> class_indices(const Labels& labels, int c);

}  // namespace lcdl
