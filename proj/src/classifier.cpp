#include "lcdl/classifier.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lcdl/linalg.hpp"

namespace lcdl::classifier {

Matrix build_projector(const Dictionary& dict, double eta1) {
  if (!(eta1 >= 0.0) || !std::isfinite(eta1)) {
    throw Error(ErrorCode::InvalidParameter, "eta1 must be nonnegative");
  }
  Matrix gram = dict.atoms.transpose() * dict.atoms;
  gram.diagonal().array() += eta1;
  const linalg::SpdFactor factor(gram, 0.0, ErrorCode::SingularSystem);
  return factor.solve(Matrix(dict.atoms.transpose()));
}

Vector regularized_residuals(const Vector& sample, const Vector& code,
                             const Dictionary& dict) {
  if (sample.size() != dict.dim() || code.size() != dict.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "sample or code does not match the dictionary");
  }
  const int num_classes = dict.num_classes();
  Vector partial = Vector::Zero(dict.dim());
  Vector out(num_classes);
  for (int c = 1; c <= num_classes; ++c) {
    partial.setZero();
    double mass = 0.0;
    for (Eigen::Index k = 0; k < dict.size(); ++k) {
      if (dict.atom_labels[static_cast<std::size_t>(k)] != c) continue;
      partial.noalias() += code[k] * dict.atoms.col(k);
      mass += code[k] * code[k];
    }
    const double norm = std::sqrt(mass);
    out[c - 1] = norm < 1e-12 ? std::numeric_limits<double>::infinity()
                              : (sample - partial).norm() / norm;
  }
  return out;
}

Decision decide(Vector residuals, Vector svm_scores, double eta2) {
  if (residuals.size() != svm_scores.size() || residuals.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "residuals and scores must have the same nonzero length");
  }
  Decision d;
  d.fused = residuals - eta2 * svm_scores;
  // The sentinel keeps r_c = +inf at +inf even when eta2 = 0.
  for (Eigen::Index c = 0; c < residuals.size(); ++c) {
    if (std::isinf(residuals[c]) && residuals[c] > 0) {
      d.fused[c] = std::numeric_limits<double>::infinity();
    }
  }
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < d.fused.size(); ++c) {
    if (d.fused[c] < d.fused[best]) best = c;
  }
  d.predicted_class = static_cast<int>(best) + 1;
  d.residuals = std::move(residuals);
  d.svm_scores = std::move(svm_scores);
  return d;
}

Decision classify(const Vector& sample, const TrainedModel& model) {
  if (sample.size() != model.projector.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "sample has " + std::to_string(sample.size()) +
                    " features, model expects " +
                    std::to_string(model.projector.cols()));
  }
  const Vector code = model.projector * sample;
  return decide(regularized_residuals(sample, code, model.dictionary),
                svm::scores(code, model.svm), model.params.eta2);
}

BatchResult classify_batch(const FeatureMatrix& samples, const Labels* labels,
                           const TrainedModel& model) {
  if (samples.cols() == 0) {
    throw Error(ErrorCode::EmptyInput, "no samples to classify");
  }
  if (labels && static_cast<Eigen::Index>(labels->size()) != samples.cols()) {
    throw Error(ErrorCode::LengthMismatch, "labels do not match samples");
  }
  const int num_classes = model.num_classes();
  BatchResult out;
  out.decisions.reserve(static_cast<std::size_t>(samples.cols()));
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    out.decisions.push_back(classify(samples.col(i), model));
  }
  if (labels) {
    out.confusion = Eigen::MatrixXi::Zero(num_classes, num_classes);
    for (std::size_t i = 0; i < labels->size(); ++i) {
      const int truth = (*labels)[i];
      if (truth < 1 || truth > num_classes) {
        throw Error(ErrorCode::ClassOutOfRange,
                    "label " + std::to_string(truth) + " unknown to the model",
                    static_cast<long>(i));
      }
      ++out.confusion(truth - 1, out.decisions[i].predicted_class - 1);
    }
    out.accuracy = static_cast<double>(out.confusion.trace()) /
                   static_cast<double>(samples.cols());
  }
  return out;
}

FeatureMatrix prepare_input(const FeatureMatrix& raw, const TrainedModel& model) {
  if (raw.rows() != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "input has " + std::to_string(raw.rows()) +
                    " features, model expects " +
                    std::to_string(model.input_dim()));
  }
  return model.pca ? ingest::pca_apply(*model.pca, raw) : raw;
}

}  // namespace lcdl::classifier
