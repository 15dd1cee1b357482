#pragma once

#include <optional>
#include <vector>

#include "lcdl/trainer.hpp"

namespace lcdl {

struct Decision {
  int predicted_class = 0;
  Vector residuals;
  Vector svm_scores;
  Vector fused;
};

namespace classifier {

/// P = (D^T D + eta1 I)^{-1} D^T. Throws SingularSystem when the system
/// cannot be factored (eta1 = 0 with K > m).
Matrix build_projector(const Dictionary& dict, double eta1);

/// r_c = ||x - D_c z_c|| / ||z_c||; +inf when ||z_c|| < 1e-12.
Vector regularized_residuals(const Vector& sample, const Vector& code,
                             const Dictionary& dict);

/// argmin_c (r_c - eta2 s_c), ties to the lowest class.
Decision decide(Vector residuals, Vector svm_scores, double eta2);

/// Codes with the model's projector and applies the fused rule. `sample`
/// lives in the dictionary's space (PCA already applied).
Decision classify(const Vector& sample, const TrainedModel& model);

struct BatchResult {
  std::vector<Decision> decisions;
  std::optional<double> accuracy;
  /// confusion(i, j) counts true class i + 1 predicted as j + 1.
  Eigen::MatrixXi confusion;
};

/// Classifies every column; accuracy and confusion are filled when labels
/// are supplied. Throws EmptyInput for zero columns.
BatchResult classify_batch(const FeatureMatrix& samples,
                           const Labels* labels, const TrainedModel& model);

/// Applies the model's PCA (if any) to raw features, checking the dimension.
FeatureMatrix prepare_input(const FeatureMatrix& raw, const TrainedModel& model);

}  // namespace classifier
}  // namespace lcdl
