#include <doctest.h>

#include <fstream>
#include <sstream>

#include "lcdl/classifier.hpp"
#include "lcdl/model_io.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace lcdl;

namespace {

TrainedModel trained(bool with_pca) {
  oracle::Gen gen(1);
  const auto ds = oracle::make_blobs(3, 8, 10, 4.0, gen);
  HyperParams p;
  p.atoms_per_class = 3;
  p.knn_k = 2;
  p.max_iters = 3;
  p.delta = 0.75;
  auto model = trainer::train(ds, p).first;
  model.label_map.names = {"alpha", "beta", "\xCE\xB3"};
  if (with_pca) {
    auto pca = ingest::pca_fit(ds.features, ingest::Dimensions{8});
    model.pca = pca;
  }
  return model;
}

void check_equal(const TrainedModel& a, const TrainedModel& b) {
  CHECK(a.dictionary.atoms == b.dictionary.atoms);
  CHECK(a.dictionary.atom_labels == b.dictionary.atom_labels);
  CHECK(a.svm.normals == b.svm.normals);
  CHECK(a.svm.biases == b.svm.biases);
  CHECK(a.projector == b.projector);
  CHECK(a.label_map == b.label_map);
  CHECK(a.params.lambda1 == b.params.lambda1);
  CHECK(a.params.lambda2 == b.params.lambda2);
  CHECK(a.params.theta == b.params.theta);
  CHECK(a.params.eta1 == b.params.eta1);
  CHECK(a.params.eta2 == b.params.eta2);
  CHECK(a.params.atoms_per_class == b.params.atoms_per_class);
  CHECK(a.params.knn_k == b.params.knn_k);
  CHECK(a.params.delta == b.params.delta);
  CHECK(a.params.max_iters == b.params.max_iters);
  CHECK(a.params.ridge_eps == b.params.ridge_eps);
  CHECK(a.params.seed == b.params.seed);
  REQUIRE(a.pca.has_value() == b.pca.has_value());
  if (a.pca) {
    CHECK(a.pca->mean == b.pca->mean);
    CHECK(a.pca->basis == b.pca->basis);
    CHECK(a.pca->eigenvalues == b.pca->eigenvalues);
    CHECK(a.pca->explained_variance_ratio == b.pca->explained_variance_ratio);
  }
}

}  // namespace

TEST_CASE("models survive a round trip bit for bit") {
  for (bool with_pca : {false, true}) {
    const auto model = trained(with_pca);
    std::stringstream buf;
    model_io::write(buf, model);
    const auto back = model_io::read(buf);
    check_equal(model, back);

    std::stringstream again;
    model_io::write(again, back);
    std::stringstream first;
    model_io::write(first, model);
    CHECK(again.str() == first.str());
  }
}

TEST_CASE("predictions after reload match the in-memory model") {
  TempDir dir;
  const auto model = trained(false);
  model_io::save(dir / "m.lcd", model);
  const auto back = model_io::load(dir / "m.lcd");
  oracle::Gen gen(2);
  const Matrix x = oracle::random_matrix(8, 20, gen);
  const auto a = classifier::classify_batch(x, nullptr, model);
  const auto b = classifier::classify_batch(x, nullptr, back);
  for (std::size_t i = 0; i < a.decisions.size(); ++i) {
    CHECK(a.decisions[i].predicted_class == b.decisions[i].predicted_class);
    CHECK(a.decisions[i].fused == b.decisions[i].fused);
  }
}

TEST_CASE("header starts with magic and version") {
  std::stringstream buf;
  model_io::write(buf, trained(false));
  const std::string s = buf.str();
  CHECK(s.substr(0, 4) == "LCDS");
  CHECK(s[4] == '\x01');
}

TEST_CASE("corrupt files are rejected") {
  std::stringstream buf;
  model_io::write(buf, trained(true));
  const std::string good = buf.str();

  auto read_code = [](const std::string& bytes) {
    std::istringstream in(bytes);
    try {
      model_io::read(in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };

  std::string version = good;
  version[4] = '\x02';
  CHECK(read_code(version) == ErrorCode::ModelVersion);
  std::string magic = good;
  magic[0] = 'X';
  CHECK(read_code(magic) == ErrorCode::BadModelFile);
  CHECK(read_code(good.substr(0, good.size() / 2)) == ErrorCode::BadModelFile);
  CHECK(read_code(good + "junk") == ErrorCode::BadModelFile);
  CHECK(read_code("") == ErrorCode::BadModelFile);
}

TEST_CASE("missing model file") {
  try {
    model_io::load("/nonexistent/model.lcd");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
