#pragma once

#include <filesystem>
#include <thread>
#include <vector>

#include "wavegen/beamspec.hpp"
#include "wavegen/cao.hpp"
#include "wavegen/covfit.hpp"
#include "wavegen/io.hpp"
#include "wavegen/rng.hpp"

#include <json.hpp>

namespace wavegen {

// Real encoding of the strict upper triangle of R in row-major order,
// real parts first, then imaginary parts. Length M(M-1).
struct ConditioningVector {
  RVector r;
};

inline ConditioningVector build_conditioning_vector(const CorrelationMatrix& R) {
  R.validate(1e-6);
  const Eigen::Index m = R.m();
  const Eigen::Index half = m * (m - 1) / 2;
  RVector r(2 * half);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) {
      r[k] = std::real(R.R(i, j));
      r[half + k] = std::imag(R.R(i, j));
      ++k;
    }
  return ConditioningVector{std::move(r)};
}

struct WaveformSample {
  CodeMatrix X;
  int class_id = 0;
  RVector r;  // conditioning vector of the class correlation matrix
};

struct ClassRecord {
  int class_id = 0;
  FitResult fit;
  std::vector<double> sample_residuals;  // ||N R - X^H X||_F per sample
};

struct DatasetManifest {
  int format_version = 1;
  int n = 0;
  int m = 0;
  int samples_per_class = 0;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.0;
  BeamClassCatalog catalog;
  std::vector<ClassRecord> classes;
};

struct Dataset {
  DatasetManifest manifest;
  // class-major: samples[c * samples_per_class + s]
  std::vector<WaveformSample> samples;

  const WaveformSample& sample(int class_id, int idx) const {
    return samples[std::size_t(class_id) * manifest.samples_per_class + idx];
  }
};

namespace detail {

inline std::uint64_t fit_seed(std::uint64_t master, int class_id) {
  return derive_seed(master, 1, std::uint64_t(class_id));
}
inline std::uint64_t cao_seed(std::uint64_t master, int class_id, int sample) {
  return derive_seed(master, 2, std::uint64_t(class_id), std::uint64_t(sample));
}

// Runs jobs 0..count-1 on a fixed worker-to-index mapping so outputs land in
// preassigned slots regardless of scheduling.
template <typename Fn>
void parallel_for(int count, int n_threads, Fn&& fn) {
  if (n_threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  const int k = std::min(n_threads, count);
  workers.reserve(k);
  for (int t = 0; t < k; ++t)
    workers.emplace_back([&, t] {
      for (int i = t; i < count; i += k) fn(i);
    });
  for (auto& w : workers) w.join();
}

}  // namespace detail

// One correlation fit per class, then samples_per_class independent cyclic
// synthesis runs per class with seeds derived from (master seed, class,
// sample index); the result is independent of thread count.
inline Dataset generate_dataset(const BeamClassCatalog& catalog, int n, int m,
                                int samples_per_class, std::uint64_t seed,
                                const ArrayGeometry& geom, const AngleGrid& grid,
                                const FitOptions& fit_options = {},
                                const CaoOptions& cao_options = {},
                                int n_threads = int(std::thread::hardware_concurrency())) {
  require(!catalog.specs.empty(), "catalog is empty");
  require(geom.m() == m, "array geometry does not match M");
  catalog.validate();

  Dataset ds;
  ds.manifest.n = n;
  ds.manifest.m = m;
  ds.manifest.samples_per_class = samples_per_class;
  ds.manifest.seed = seed;
  ds.manifest.catalog = catalog;
  ds.manifest.classes.resize(catalog.size());

  const int n_classes = int(catalog.size());
  detail::parallel_for(n_classes, n_threads, [&](int c) {
    FitOptions opts = fit_options;
    opts.seed = detail::fit_seed(seed, c);
    ClassRecord rec;
    rec.class_id = c;
    rec.fit = fit_correlation(catalog.specs[c], geom, grid, opts);
    rec.sample_residuals.resize(samples_per_class);
    ds.manifest.classes[c] = std::move(rec);
  });

  ds.samples.resize(std::size_t(n_classes) * samples_per_class);
  detail::parallel_for(n_classes * samples_per_class, n_threads, [&](int job) {
    const int c = job / samples_per_class;
    const int s = job % samples_per_class;
    const ClassRecord& rec = ds.manifest.classes[c];
    CaoResult res = ca_synthesize_with_factor(rec.fit.L, n,
                                              detail::cao_seed(seed, c, s),
                                              cao_options);
    const double residual =
        (double(n) * rec.fit.R.R - res.X.X.adjoint() * res.X.X).norm();
    ds.manifest.classes[c].sample_residuals[s] = residual;
    WaveformSample& out = ds.samples[job];
    out.X = std::move(res.X);
    out.class_id = c;
  });

  for (int c = 0; c < n_classes; ++c) {
    const RVector r = build_conditioning_vector(ds.manifest.classes[c].fit.R).r;
    for (int s = 0; s < samples_per_class; ++s)
      ds.samples[std::size_t(c) * samples_per_class + s].r = r;
  }
  return ds;
}

// --- persistence ------------------------------------------------------------

namespace detail {

inline nlohmann::json complex_matrix_to_json(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back({std::real(m(r, c)), std::imag(m(r, c))});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix complex_matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = Eigen::Index(j.size());
  const Eigen::Index cols = rows ? Eigen::Index(j.at(0).size()) : 0;
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = Complex(j.at(r).at(c).at(0).get<double>(),
                        j.at(r).at(c).at(1).get<double>());
  return m;
}

}  // namespace detail

inline nlohmann::json manifest_to_json(const DatasetManifest& man) {
  nlohmann::json j;
  j["format_version"] = man.format_version;
  j["n"] = man.n;
  j["m"] = man.m;
  j["samples_per_class"] = man.samples_per_class;
  j["seed"] = man.seed;
  j["holdout_fraction"] = man.holdout_fraction;
  j["catalog"] = to_json(man.catalog);
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& rec : man.classes) {
    nlohmann::json c;
    c["class_id"] = rec.class_id;
    c["alpha"] = rec.fit.alpha;
    c["objective"] = rec.fit.objective;
    c["iterations"] = rec.fit.iterations;
    c["converged"] = rec.fit.converged;
    c["R"] = detail::complex_matrix_to_json(rec.fit.R.R);
    c["L"] = detail::complex_matrix_to_json(rec.fit.L.L);
    c["sample_residuals"] = rec.sample_residuals;
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);
  return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest man;
  man.format_version = j.at("format_version").get<int>();
  man.n = j.at("n").get<int>();
  man.m = j.at("m").get<int>();
  man.samples_per_class = j.at("samples_per_class").get<int>();
  man.seed = j.at("seed").get<std::uint64_t>();
  man.holdout_fraction = j.at("holdout_fraction").get<double>();
  man.catalog = catalog_from_json(j.at("catalog"));
  for (const auto& c : j.at("classes")) {
    ClassRecord rec;
    rec.class_id = c.at("class_id").get<int>();
    rec.fit.alpha = c.at("alpha").get<double>();
    rec.fit.objective = c.at("objective").get<double>();
    rec.fit.iterations = c.at("iterations").get<int>();
    rec.fit.converged = c.at("converged").get<bool>();
    rec.fit.R = CorrelationMatrix(detail::complex_matrix_from_json(c.at("R")));
    rec.fit.L = SqrtFactor{detail::complex_matrix_from_json(c.at("L"))};
    rec.sample_residuals = c.at("sample_residuals").get<std::vector<double>>();
    man.classes.push_back(std::move(rec));
  }
  return man;
}

inline void save_dataset(const std::string& dir, const Dataset& ds) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_text_file((fs::path(dir) / "manifest.json").string(),
                  manifest_to_json(ds.manifest).dump(2) + "\n");
  for (std::size_t c = 0; c < ds.manifest.classes.size(); ++c) {
    std::vector<CodeMatrix> mats;
    mats.reserve(ds.manifest.samples_per_class);
    for (int s = 0; s < ds.manifest.samples_per_class; ++s)
      mats.push_back(ds.sample(int(c), s).X);
    write_code_blob((fs::path(dir) / ("class_" + std::to_string(c) + ".bin")).string(),
                    mats, std::uint32_t(ds.manifest.n), std::uint32_t(ds.manifest.m));
  }
}

inline Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  Dataset ds;
  ds.manifest = manifest_from_json(
      nlohmann::json::parse(read_text_file((fs::path(dir) / "manifest.json").string())));
  ds.samples.reserve(ds.manifest.classes.size() * ds.manifest.samples_per_class);
  for (std::size_t c = 0; c < ds.manifest.classes.size(); ++c) {
    std::uint32_t n = 0, m = 0;
    auto mats = read_code_blob(
        (fs::path(dir) / ("class_" + std::to_string(c) + ".bin")).string(), &n, &m);
    require(int(n) == ds.manifest.n && int(m) == ds.manifest.m,
            "class blob header does not match manifest");
    require(int(mats.size()) == ds.manifest.samples_per_class,
            "class blob sample count does not match manifest");
    const RVector r = build_conditioning_vector(ds.manifest.classes[c].fit.R).r;
    for (auto& x : mats)
      ds.samples.push_back(WaveformSample{std::move(x), int(c), r});
  }
  return ds;
}

}  // namespace wavegen
