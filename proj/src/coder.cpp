#include "lcdl/coder.hpp"

#include <map>
#include <string>

namespace lcdl::coder {

namespace {

void check_system_shapes(const Dictionary& dict, const Matrix& laplacian,
                         const Vector& sample) {
  const Eigen::Index k = dict.size();
  if (laplacian.rows() != k || laplacian.cols() != k) {
    throw Error(ErrorCode::DimensionMismatch,
                "Laplacian must be " + std::to_string(k) + "x" +
                    std::to_string(k));
  }
  if (sample.size() != dict.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "sample has " + std::to_string(sample.size()) +
                    " features, dictionary has " + std::to_string(dict.dim()));
  }
}

void check_svm_shapes(const Dictionary& dict, const SvmModel& svm,
                      const Vector& targets) {
  if (svm.normals.rows() != dict.size() ||
      svm.biases.size() != svm.normals.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "SVM normals do not match the dictionary size");
  }
  if (targets.size() != svm.normals.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(targets.size()) + " targets for " +
                    std::to_string(svm.normals.cols()) + " classes");
  }
}

Matrix base_system(const Dictionary& dict, const Matrix& laplacian,
                   double lambda1) {
  Matrix a = dict.atoms.transpose() * dict.atoms;
  if (lambda1 != 0.0) a.noalias() += lambda1 * laplacian;
  return a;
}

double svm_weight(const HyperParams& params) {
  return 2.0 * params.lambda2 * params.theta;
}

Vector class_targets(int label, int num_classes) {
  Vector y = Vector::Constant(num_classes, -1.0);
  y[label - 1] = 1.0;
  return y;
}

}  // namespace

double quad_hinge(const Vector& code, double target, const Vector& normal,
                  double bias) {
  if (code.size() != normal.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "code and normal lengths differ");
  }
  const double h = 1.0 - target * (normal.dot(code) + bias);
  return h > 0.0 ? h * h : 0.0;
}

ActiveSet active_classes(const Vector& code, const Vector& targets,
                         const SvmModel& svm) {
  if (targets.size() != svm.normals.cols() ||
      code.size() != svm.normals.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "code/targets do not match the SVM model");
  }
  ActiveSet phi;
  for (Eigen::Index c = 0; c < svm.normals.cols(); ++c) {
    const double margin =
        targets[c] * (svm.normals.col(c).dot(code) + svm.biases[c]);
    if (margin < 1.0) phi.classes.push_back(static_cast<int>(c) + 1);
  }
  return phi;
}

Matrix system_matrix(const Dictionary& dict, const Matrix& laplacian,
                     double lambda1, double weight, const SvmModel& svm,
                     const ActiveSet& phi) {
  Matrix a = base_system(dict, laplacian, lambda1);
  if (weight != 0.0) {
    for (int c : phi.classes) {
      const auto u = svm.normals.col(c - 1);
      a.noalias() += weight * u * u.transpose();
    }
  }
  return a;
}

Vector system_rhs(const Dictionary& dict, const Vector& sample, double weight,
                  const SvmModel& svm, const Vector& targets,
                  const ActiveSet& phi) {
  Vector rhs = dict.atoms.transpose() * sample;
  if (weight != 0.0) {
    for (int c : phi.classes) {
      rhs.noalias() +=
          weight * (targets[c - 1] - svm.biases[c - 1]) * svm.normals.col(c - 1);
    }
  }
  return rhs;
}

linalg::SpdFactor factor_system(const Matrix& system) {
  return linalg::SpdFactor(system, linalg::kStabilizingRidgeScale,
                           ErrorCode::SingularSystem);
}

Vector code_initial(const Dictionary& dict, const Matrix& laplacian,
                    const Vector& sample, double lambda1) {
  check_system_shapes(dict, laplacian, sample);
  return factor_system(base_system(dict, laplacian, lambda1))
      .solve(Vector(dict.atoms.transpose() * sample));
}

Vector code_with_svm(const Dictionary& dict, const Matrix& laplacian,
                     const Vector& sample, const HyperParams& params,
                     const SvmModel& svm, const Vector& targets,
                     const ActiveSet& phi) {
  check_system_shapes(dict, laplacian, sample);
  check_svm_shapes(dict, svm, targets);
  const double w = svm_weight(params);
  return factor_system(
             system_matrix(dict, laplacian, params.lambda1, w, svm, phi))
      .solve(system_rhs(dict, sample, w, svm, targets, phi));
}

CodingSweep code_all(const Dictionary& dict, const Matrix& laplacian,
                     const FeatureMatrix& samples, const Labels& labels,
                     int num_classes, const HyperParams& params,
                     const SvmModel& svm, int iteration,
                     const CodingMatrix& previous) {
  const Eigen::Index n = samples.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw Error(ErrorCode::LengthMismatch, "labels do not match samples");
  }
  if (samples.rows() != dict.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "samples have " + std::to_string(samples.rows()) +
                    " features, dictionary has " + std::to_string(dict.dim()));
  }
  if (laplacian.rows() != dict.size() || laplacian.cols() != dict.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Laplacian does not match K");
  }

  CodingSweep out;
  out.codes.resize(dict.size(), n);
  out.active_sets.resize(static_cast<std::size_t>(n));

  if (iteration <= 1) {
    std::optional<linalg::SpdFactor> factor;
    try {
      factor.emplace(factor_system(base_system(dict, laplacian, params.lambda1)));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (column 0)", 0);
    }
    const ActiveSet none;
    for (Eigen::Index i = 0; i < n; ++i) {
      out.codes.col(i) =
          factor->solve(system_rhs(dict, samples.col(i), 0.0, svm, Vector(), none));
    }
    return out;
  }

  if (previous.rows() != dict.size() || previous.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "previous codes must be " + std::to_string(dict.size()) + "x" +
                    std::to_string(n));
  }
  if (svm.normals.rows() != dict.size() || svm.normals.cols() != num_classes) {
    throw Error(ErrorCode::DimensionMismatch,
                "SVM does not match the dictionary or class count");
  }

  const double w = svm_weight(params);
  std::map<ActiveSet, linalg::SpdFactor> factors;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector targets = class_targets(labels[static_cast<std::size_t>(i)],
                                         num_classes);
    ActiveSet phi = active_classes(previous.col(i), targets, svm);
    auto it = factors.find(phi);
    if (it == factors.end()) {
      try {
        it = factors
                 .emplace(phi, factor_system(system_matrix(
                                   dict, laplacian, params.lambda1, w, svm, phi)))
                 .first;
      } catch (const Error& e) {
        throw Error(e.code(),
                    std::string(e.what()) + " (column " + std::to_string(i) + ")",
                    static_cast<long>(i));
      }
    }
    out.codes.col(i) =
        it->second.solve(system_rhs(dict, samples.col(i), w, svm, targets, phi));
    out.active_sets[static_cast<std::size_t>(i)] = std::move(phi);
  }
  return out;
}

double stationarity_residual(const Matrix& system, const Vector& rhs,
                             const Vector& code) {
  return (system * code - rhs).norm() / (1.0 + rhs.norm());
}

}  // namespace lcdl::coder
