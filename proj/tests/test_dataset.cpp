#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "wavegen/dataset.hpp"

using namespace wavegen;
namespace fs = std::filesystem;

namespace {

BeamClassCatalog tiny_catalog() {
  BeamClassCatalog cat;
  BeamSpec a = rect_beam(30.0, 0.0);
  a.class_id = 0;
  BeamSpec b = rect_beam(60.0, 0.0);
  b.class_id = 1;
  BeamSpec c = notched_beam();
  c.class_id = 2;
  cat.specs = {a, b, c};
  return cat;
}

Dataset tiny_dataset(std::uint64_t seed, int threads = 2) {
  FitOptions fit;
  fit.restarts = 2;
  fit.max_iters = 300;
  return generate_dataset(tiny_catalog(), 12, 3, 4, seed, ArrayGeometry(3),
                          AngleGrid::standard(2.0), fit, {}, threads);
}

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

}  // namespace

TEST_CASE("conditioning vector encoding") {
  SECTION("M = 2 single off-diagonal entry") {
    CMatrix r(2, 2);
    r << Complex(1, 0), Complex(0.5, 0.3), Complex(0.5, -0.3), Complex(1, 0);
    const ConditioningVector v = build_conditioning_vector(CorrelationMatrix(r));
    REQUIRE(v.r.size() == 2);
    REQUIRE(v.r[0] == 0.5);
    REQUIRE(v.r[1] == 0.3);
  }

  SECTION("identity encodes to zeros") {
    const ConditioningVector v =
        build_conditioning_vector(CorrelationMatrix::identity(4));
    REQUIRE(v.r.size() == 12);
    REQUIRE(v.r.cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("M = 10 has length 90, row-major upper-triangle order") {
    CMatrix r = CMatrix::Identity(10, 10);
    r(0, 1) = Complex(0.25, -0.125);
    r(1, 0) = std::conj(r(0, 1));
    r(8, 9) = Complex(-0.5, 0.75);
    r(9, 8) = std::conj(r(8, 9));
    const ConditioningVector v = build_conditioning_vector(CorrelationMatrix(r));
    REQUIRE(v.r.size() == 90);
    REQUIRE(v.r[0] == 0.25);        // R_12 real part comes first
    REQUIRE(v.r[44] == -0.5);       // R_9,10 real part is the last of the reals
    REQUIRE(v.r[45] == -0.125);     // imaginary parts follow in the same order
    REQUIRE(v.r[89] == 0.75);
  }

  SECTION("non-unit diagonal is rejected") {
    CMatrix r = CMatrix::Identity(3, 3);
    r(1, 1) = Complex(1.01, 0.0);
    REQUIRE_THROWS(build_conditioning_vector(CorrelationMatrix(r)));
  }
}

TEST_CASE("dataset generation") {
  const Dataset ds = tiny_dataset(1001);

  SECTION("class balance and shared per-class correlation") {
    REQUIRE(ds.manifest.classes.size() == 3);
    REQUIRE(ds.samples.size() == 12);
    for (int c = 0; c < 3; ++c)
      for (int s = 0; s < 4; ++s) {
        const WaveformSample& w = ds.sample(c, s);
        REQUIRE(w.class_id == c);
        REQUIRE(w.X.n() == 12);
        REQUIRE(w.X.m() == 3);
        REQUIRE(w.X.max_modulus_error() < 1e-12);
        const RVector expect =
            build_conditioning_vector(ds.manifest.classes[c].fit.R).r;
        REQUIRE((w.r - expect).cwiseAbs().maxCoeff() == 0.0);
      }
  }

  SECTION("residual statistics recorded per sample") {
    for (const auto& rec : ds.manifest.classes) {
      REQUIRE(rec.sample_residuals.size() == 4);
      for (double r : rec.sample_residuals) REQUIRE(r >= 0.0);
    }
  }

  SECTION("same master seed reproduces the corpus bit-exactly") {
    const Dataset again = tiny_dataset(1001, /*threads=*/1);
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
      REQUIRE((ds.samples[i].X.X - again.samples[i].X.X).cwiseAbs().maxCoeff() == 0.0);
    for (int c = 0; c < 3; ++c)
      REQUIRE((ds.manifest.classes[c].fit.R.R - again.manifest.classes[c].fit.R.R)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
  }

  SECTION("different seeds differ") {
    const Dataset other = tiny_dataset(1002);
    REQUIRE((ds.samples[0].X.X - other.samples[0].X.X).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("dataset persistence round-trip") {
  const fs::path dir = fs::temp_directory_path() / "wavegen_test_dataset";
  fs::remove_all(dir);
  const Dataset ds = tiny_dataset(77);
  save_dataset(dir.string(), ds);

  SECTION("save -> load -> save produces identical bytes") {
    const std::string manifest_once = slurp(dir / "manifest.json");
    const std::string blob_once = slurp(dir / "class_1.bin");
    const Dataset loaded = load_dataset(dir.string());
    const fs::path dir2 = fs::temp_directory_path() / "wavegen_test_dataset2";
    fs::remove_all(dir2);
    save_dataset(dir2.string(), loaded);
    REQUIRE(slurp(dir2 / "manifest.json") == manifest_once);
    REQUIRE(slurp(dir2 / "class_1.bin") == blob_once);
    fs::remove_all(dir2);
  }

  SECTION("loaded samples match in memory") {
    const Dataset loaded = load_dataset(dir.string());
    REQUIRE(loaded.samples.size() == ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      REQUIRE((loaded.samples[i].X.X - ds.samples[i].X.X).cwiseAbs().maxCoeff() == 0.0);
      REQUIRE(loaded.samples[i].class_id == ds.samples[i].class_id);
    }
  }

  SECTION("blob header is the fixed 16-byte layout") {
    const std::string blob = slurp(dir / "class_0.bin");
    REQUIRE(blob.size() == 16 + 4 * 12 * 3 * 2 * 8);
    REQUIRE(blob.substr(0, 4) == "WVFC");
    // version 1, N = 12, M = 3 as little-endian u32
    REQUIRE(std::uint8_t(blob[4]) == 1);
    REQUIRE(std::uint8_t(blob[8]) == 12);
    REQUIRE(std::uint8_t(blob[12]) == 3);
  }
  fs::remove_all(dir);
}
