#include <doctest.h>

#include "lcdl/dictionary.hpp"
#include "lcdl/trainer.hpp"
#include "oracles.hpp"

using namespace lcdl;

TEST_CASE("objective of an exact factorization without regularizers is zero") {
  oracle::Gen gen(1);
  const auto dict = oracle::random_dictionary(4, 2, 2, gen);
  const Matrix z = oracle::random_matrix(4, 5, gen);
  HyperParams p;
  p.lambda1 = 0.0;
  p.lambda2 = 0.0;
  const Matrix x = dict.atoms * z;
  CHECK(trainer::objective(x, dict, z, Matrix::Identity(4, 4),
                           SvmModel::zeros(4, 2), {1, 2, 1, 2, 2}, p) <= 1e-28);
}

TEST_CASE("objective is the sum of its module-level terms") {
  oracle::Gen gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto dict = oracle::random_dictionary(5, 2, 3, gen);
    const Matrix x = oracle::random_matrix(5, 7, gen);
    const Matrix z = oracle::random_matrix(6, 7, gen);
    const Matrix l = oracle::laplacian_of(oracle::random_similarity(6, gen));
    SvmModel svm;
    svm.normals = oracle::random_matrix(6, 2, gen);
    svm.biases = oracle::random_matrix(2, 1, gen).col(0);
    const Labels y{1, 2, 2, 1, 1, 2, 1};
    HyperParams p;
    p.lambda1 = gen.uniform(0.0, 1.0);
    p.lambda2 = gen.uniform(0.0, 1.0);

    double svm_part = 0.0;
    for (int c = 1; c <= 2; ++c) {
      svm_part += svm::binary_objective(z, one_vs_all_targets(y, c, 2),
                                        svm.normals.col(c - 1), svm.biases[c - 1],
                                        p.theta);
    }
    const double expected = (x - dict.atoms * z).squaredNorm() +
                            p.lambda1 * graph::locality_energy(z, l) +
                            2.0 * p.lambda2 * svm_part;
    CHECK(oracle::rel_close(trainer::objective(x, dict, z, l, svm, y, p), expected,
                            1e-12));
  }
}

TEST_CASE("objective on a hand-evaluated instance") {
  Matrix x(2, 2), d(2, 2), z(2, 2), l(2, 2);
  x << 1, 0, 2, 1;
  d << 1, 0.6, 0, 0.8;
  z << 0.5, -0.2, 1.0, 0.5;
  l << 0.3, -0.3, -0.3, 0.3;
  SvmModel svm;
  svm.normals.resize(2, 2);
  svm.normals << 0.4, -0.1, 0.2, 0.3;
  svm.biases = Vector{{0.1, -0.2}};
  HyperParams p;
  p.lambda1 = 0.5;
  p.lambda2 = 0.25;
  p.theta = 0.2;
  const Dictionary dict{d, {1, 2}};
  const Labels y{1, 2};
  CHECK(trainer::reconstruction_term(x, d, z) == doctest::Approx(1.82).epsilon(1e-14));
  CHECK(graph::locality_energy(z, l) == doctest::Approx(0.222).epsilon(1e-14));
  CHECK(trainer::svm_term(z, y, svm, p.theta) ==
        doctest::Approx(2.0 * 1.03356).epsilon(1e-14));
  CHECK(trainer::objective(x, dict, z, l, svm, y, p) ==
        doctest::Approx(2.44778).epsilon(1e-14));
}

TEST_CASE("initialize") {
  oracle::Gen gen(3);
  const auto ds = oracle::make_blobs(3, 6, 8, 3.0, gen);
  HyperParams p;
  p.atoms_per_class = 4;
  p.knn_k = 3;
  p.seed = 99;

  SUBCASE("is deterministic for a fixed seed") {
    const auto a = trainer::initialize(ds, p);
    const auto b = trainer::initialize(ds, p);
    CHECK(a.dictionary.atoms == b.dictionary.atoms);
    CHECK(a.codes == b.codes);
    p.seed = 100;
    CHECK(trainer::initialize(ds, p).dictionary.atoms != a.dictionary.atoms);
  }
  SUBCASE("draws unit atoms from the right class without replacement") {
    const auto init = trainer::initialize(ds, p);
    CHECK(init.dictionary.size() == 12);
    CHECK(init.svm.normals.isZero(0.0));
    CHECK(init.svm.biases.isZero(0.0));
    for (Eigen::Index k = 0; k < 12; ++k) {
      const int c = init.dictionary.atom_labels[static_cast<std::size_t>(k)];
      CHECK(c == 1 + static_cast<int>(k / 4));
      CHECK(std::abs(init.dictionary.atoms.col(k).norm() - 1.0) <= 1e-15);
      int matches = 0;
      for (Eigen::Index j : class_indices(ds.labels, c)) {
        if ((ds.features.col(j).normalized() - init.dictionary.atoms.col(k)).norm() < 1e-15) {
          ++matches;
        }
      }
      CHECK(matches == 1);
      for (Eigen::Index other = 0; other < k; ++other) {
        CHECK(init.dictionary.atoms.col(other) != init.dictionary.atoms.col(k));
      }
    }
  }
  SUBCASE("atoms_per_class times C atoms") {
    oracle::Gen g(4);
    const auto many = oracle::make_blobs(38, 5, 2, 3.0, g);
    HyperParams q;
    const auto init = trainer::initialize(many, q);
    CHECK(init.dictionary.size() == 380);
    CHECK(init.codes.rows() == 380);
  }
  SUBCASE("one sample per class and one atom per class") {
    oracle::Gen g(5);
    const auto tiny = oracle::make_blobs(2, 3, 1, 3.0, g);
    HyperParams q;
    q.atoms_per_class = 1;
    q.knn_k = 1;
    const auto init = trainer::initialize(tiny, q);
    for (Eigen::Index k = 0; k < 2; ++k) {
      CHECK((init.dictionary.atoms.col(k) - tiny.features.col(k).normalized()).norm() <=
            1e-15);
    }
  }
  SUBCASE("small classes are sampled with replacement") {
    p.atoms_per_class = 10;
    const auto init = trainer::initialize(ds, p);
    CHECK(init.dictionary.size() == 30);
  }
  SUBCASE("dataset errors propagate") {
    auto bad = ds;
    bad.labels.pop_back();
    CHECK_THROWS_AS(trainer::initialize(bad, p), Error);
  }
}

namespace {

struct OptimalityProbe : trainer::SweepObserver {
  const LabeledDataset* ds = nullptr;
  HyperParams params;
  std::vector<Matrix> dicts_seen;
  Matrix last_raw;
  int coding_checks = 0;
  int failures = 0;
  double worst_coding = 0.0;
  double worst_dictionary = 0.0;
  double worst_kkt_ratio = 0.0;
  bool laplacian_from_current = true;
  bool recon_monotone = true;
  Matrix coded_atoms;

  void after_coding(int, const Dictionary& dict, const LaplacianBundle& bundle,
                    const SvmModel& svm, const coder::CodingSweep& sweep) override {
    dicts_seen.push_back(dict.atoms);
    const auto rebuilt = graph::build(dict, params.knn_k, params.delta);
    if (rebuilt.laplacian != bundle.laplacian) laplacian_from_current = false;
    if (last_raw.size() > 0) {
      // Without reinitialization the dictionary is the renormalized update.
      Matrix unit = last_raw;
      for (Eigen::Index k = 0; k < unit.cols(); ++k) unit.col(k) /= unit.col(k).norm();
      if ((unit - dict.atoms).cwiseAbs().maxCoeff() > 1e-15) laplacian_from_current = false;
    }
    const double w = 2.0 * params.lambda2 * params.theta;
    for (Eigen::Index i = 0; i < sweep.codes.cols(); ++i) {
      const auto& phi = sweep.active_sets[static_cast<std::size_t>(i)];
      Vector targets = -Vector::Ones(ds->num_classes);
      targets[ds->labels[static_cast<std::size_t>(i)] - 1] = 1.0;
      const Matrix a = coder::system_matrix(dict, bundle.laplacian, params.lambda1, w,
                                            svm, phi);
      const Vector rhs = coder::system_rhs(dict, ds->features.col(i), w, svm, targets, phi);
      worst_coding = std::max(worst_coding,
                              coder::stationarity_residual(a, rhs, sweep.codes.col(i)));
      ++coding_checks;
    }
    coded_atoms = dict.atoms;
  }

  void after_dictionary(int, const Matrix& raw, const CodingMatrix& codes,
                        double ridge) override {
    last_raw = raw;
    const Matrix xzt = ds->features * codes.transpose();
    Matrix gram = codes * codes.transpose();
    gram.diagonal().array() += ridge;
    worst_dictionary = std::max(worst_dictionary, (xzt - raw * gram).norm() / xzt.norm());
    if (trainer::reconstruction_term(ds->features, raw, codes) >
        trainer::reconstruction_term(ds->features, coded_atoms, codes) + 1e-10) {
      recon_monotone = false;
    }
  }

  void after_svm(int, const svm::MulticlassFit& fit) override {
    for (const auto& f : fit.per_class) {
      worst_kkt_ratio = std::max(
          worst_kkt_ratio, f.kkt_residual / svm::kkt_tolerance(params.theta, ds->size()));
      if (!f.converged) ++failures;
    }
  }
};

}  // namespace

TEST_CASE("every sweep leaves each subproblem at its optimum") {
  oracle::Gen gen(6);
  const auto ds = oracle::make_blobs(3, 10, 12, 4.0, gen);
  HyperParams p;
  p.atoms_per_class = 3;
  p.knn_k = 3;
  p.lambda1 = 0.05;
  p.lambda2 = 0.1;
  p.max_iters = 8;
  OptimalityProbe probe;
  probe.ds = &ds;
  probe.params = p;
  const auto [model, trace] = trainer::train(ds, p, &probe);
  CHECK(probe.coding_checks == static_cast<int>(trace.iterations()) * 36);
  CHECK(probe.worst_coding <= 1e-8);
  CHECK(probe.worst_dictionary <= 1e-8);
  CHECK(probe.worst_kkt_ratio <= 1.0);
  CHECK(probe.failures == 0);
  CHECK(probe.recon_monotone);
  CHECK(probe.laplacian_from_current);
  CHECK(trace.atom_reinit_events.empty());
}

TEST_CASE("one iteration uses only the first-iteration coding branch") {
  oracle::Gen gen(7);
  const auto ds = oracle::make_blobs(2, 5, 6, 4.0, gen);
  HyperParams p;
  p.atoms_per_class = 3;
  p.knn_k = 2;
  p.max_iters = 1;
  p.lambda2 = 10.0;
  struct Probe : trainer::SweepObserver {
    int sweeps = 0;
    bool all_empty = true;
    void after_coding(int, const Dictionary&, const LaplacianBundle&, const SvmModel&,
                      const coder::CodingSweep& s) override {
      ++sweeps;
      for (const auto& phi : s.active_sets) all_empty = all_empty && phi.empty();
    }
  } probe;
  const auto [model, trace] = trainer::train(ds, p, &probe);
  CHECK(probe.sweeps == 1);
  CHECK(probe.all_empty);
  CHECK(trace.iterations() == 1);
  CHECK(trace.active_set_sizes == std::vector<long>{0});
}

TEST_CASE("training on separated blobs lowers the objective") {
  oracle::Gen gen(8);
  const auto ds = oracle::make_blobs(3, 20, 30, 5.0, gen);
  HyperParams p;
  const auto [model, trace] = trainer::train(ds, p);
  REQUIRE(trace.iterations() >= 2);
  CHECK(trace.objective_per_iter.back() < trace.objective_per_iter.front());
  CHECK(model.dictionary.size() == 30);
  CHECK(model.projector.rows() == 30);
  CHECK(model.projector.cols() == 20);
  CHECK(model.label_map.names == std::vector<std::string>{"1", "2", "3"});
}

TEST_CASE("training is deterministic") {
  oracle::Gen gen(9);
  const auto ds = oracle::make_blobs(2, 8, 10, 3.0, gen);
  HyperParams p;
  p.atoms_per_class = 4;
  p.knn_k = 3;
  const auto a = trainer::train(ds, p);
  const auto b = trainer::train(ds, p);
  CHECK(a.first.dictionary.atoms == b.first.dictionary.atoms);
  CHECK(a.first.svm.normals == b.first.svm.normals);
  CHECK(a.first.svm.biases == b.first.svm.biases);
  CHECK(a.first.projector == b.first.projector);
  CHECK(a.second.objective_per_iter == b.second.objective_per_iter);
}

TEST_CASE("a collapsed atom is replaced by its class's worst-fit sample") {
  Matrix x(2, 4);
  x << 1, 2, 0, 5,
       0, 1, 3, 5;
  const Labels labels{1, 1, 2, 1};
  const Labels atom_labels{1, 2, 1};
  Matrix atoms(2, 3);
  atoms << 1, 0, 0,
           0, 1, 0;
  Matrix codes(3, 4);
  codes << 1, 2, 0, 5,
           0, 1, 3, 0,
           7, 7, 7, 7;
  // Residuals of class 1 samples: 0, 0, 5; sample 3 is the worst.
  trainer::reinitialize_atom(x, labels, atom_labels, atoms, codes, 2);
  CHECK(atoms.col(2) == x.col(3));
  CHECK(codes.row(2).isZero(0.0));
  CHECK(atoms.col(0) == Vector{{1.0, 0.0}});
  CHECK(codes.row(0) == Eigen::RowVector4d(1, 2, 0, 5));

  Matrix zero_x = Matrix::Zero(2, 4);
  try {
    trainer::reinitialize_atom(zero_x, labels, atom_labels, atoms, codes, 0);
    FAIL("expected DegenerateAtom");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateAtom);
    CHECK(e.index() == 0);
  }
}
