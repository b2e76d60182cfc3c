#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wavegen/array.hpp"
#include "wavegen/types.hpp"

#include <json.hpp>

namespace wavegen {

// Piecewise-constant desired beampattern: closed angular intervals with a
// target power level, implicit level 0 elsewhere.
struct BeamInterval {
  double start_deg = 0.0;
  double end_deg = 0.0;
  double level = 0.0;
};

struct BeamSpec {
  std::vector<BeamInterval> intervals;
  std::string name;
  int class_id = 0;

  void validate() const {
    bool any_positive = false;
    for (const auto& iv : intervals) {
      require(iv.start_deg <= iv.end_deg, "beam interval reversed");
      if (iv.start_deg < -90.0 || iv.end_deg > 90.0)
        throw std::domain_error("beam interval outside [-90, 90]");
      require(iv.level >= 0.0, "beam level must be nonnegative");
      if (iv.level > 0.0) any_positive = true;
    }
    for (std::size_t i = 0; i < intervals.size(); ++i)
      for (std::size_t j = i + 1; j < intervals.size(); ++j) {
        const bool disjoint = intervals[i].end_deg < intervals[j].start_deg ||
                              intervals[j].end_deg < intervals[i].start_deg;
        require(disjoint, "beam intervals overlap");
      }
    require(any_positive, "beam spec needs at least one positive-level interval");
  }
};

struct BeamClassCatalog {
  std::vector<BeamSpec> specs;

  void validate() const {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      require(specs[i].class_id == int(i), "class ids must be contiguous from 0");
      specs[i].validate();
    }
  }

  std::size_t size() const { return specs.size(); }
};

inline BeamSpec rect_beam(double width_deg, double center_deg) {
  if (width_deg <= 0.0) throw std::domain_error("beam width must be positive");
  const double lo = center_deg - 0.5 * width_deg;
  const double hi = center_deg + 0.5 * width_deg;
  if (lo < -90.0 || hi > 90.0)
    throw std::domain_error("beam does not fit inside [-90, 90]");
  BeamSpec spec;
  spec.intervals = {{lo, hi, 1.0}};
  spec.name = "rect_w" + std::to_string(int(std::lround(width_deg)));
  return spec;
}

// 60 degree beam with a 10 degree gap at broadside.
inline BeamSpec notched_beam() {
  BeamSpec spec;
  spec.intervals = {{-30.0, -5.0, 1.0}, {5.0, 30.0, 1.0}};
  spec.name = "notched_w60_g10";
  return spec;
}

// 26 rectangular beams, widths 10..60 degrees in 2 degree steps, plus the
// notched beam: 27 classes.
inline BeamClassCatalog default_catalog() {
  BeamClassCatalog cat;
  int id = 0;
  for (int w = 10; w <= 60; w += 2) {
    BeamSpec s = rect_beam(double(w), 0.0);
    s.class_id = id++;
    cat.specs.push_back(std::move(s));
  }
  BeamSpec s = notched_beam();
  s.class_id = id++;
  cat.specs.push_back(std::move(s));
  cat.validate();
  return cat;
}

// Level of the interval containing each grid angle; boundary angles belong
// to the interval (closed-interval convention).
inline RVector sample_on_grid(const BeamSpec& spec, const AngleGrid& grid) {
  RVector out = RVector::Zero(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double theta = grid.angles_deg[i];
    for (const auto& iv : spec.intervals)
      if (theta >= iv.start_deg && theta <= iv.end_deg) {
        out[i] = iv.level;
        break;
      }
  }
  return out;
}

// --- catalog (de)serialization ------------------------------------------

inline nlohmann::json to_json(const BeamSpec& spec) {
  nlohmann::json j;
  j["class_id"] = spec.class_id;
  j["name"] = spec.name;
  nlohmann::json ivs = nlohmann::json::array();
  for (const auto& iv : spec.intervals)
    ivs.push_back({iv.start_deg, iv.end_deg, iv.level});
  j["intervals"] = ivs;
  return j;
}

inline BeamSpec beamspec_from_json(const nlohmann::json& j) {
  BeamSpec spec;
  spec.class_id = j.at("class_id").get<int>();
  spec.name = j.at("name").get<std::string>();
  for (const auto& iv : j.at("intervals"))
    spec.intervals.push_back({iv.at(0).get<double>(), iv.at(1).get<double>(),
                              iv.at(2).get<double>()});
  return spec;
}

inline nlohmann::json to_json(const BeamClassCatalog& cat) {
  nlohmann::json j;
  j["classes"] = nlohmann::json::array();
  for (const auto& s : cat.specs) j["classes"].push_back(to_json(s));
  return j;
}

inline BeamClassCatalog catalog_from_json(const nlohmann::json& j) {
  BeamClassCatalog cat;
  for (const auto& s : j.at("classes")) cat.specs.push_back(beamspec_from_json(s));
  cat.validate();
  return cat;
}

}  // namespace wavegen
