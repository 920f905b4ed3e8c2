#pragma once

#include <algorithm>
#include <vector>

#include "lobeforge/core/error.hpp"

namespace lobeforge {

// One point of the tensile datasheet: engineering strain (dimensionless
// fraction) and the corresponding stress in MPa.
struct DatasheetPoint {
  double strain = 0.0;
  double stress = 0.0;
};

// Linear elastic parameters used by the shell model. Stresses in MPa force
// units come out in N with mm lengths; density is carried for reporting
// printed part mass.
struct Material {
  double youngs_modulus = 40.0;  // MPa
  double poisson = 0.45;
  double density = 1.16;         // g/cm^3
};

// Filament datasheet of the printed elastomer used by the default configs.
inline std::vector<DatasheetPoint> default_datasheet() {
  return {{0.05, 2.0}, {0.10, 4.0}, {0.50, 9.0}, {7.0, 28.0}};
}

// Small-strain modulus from the datasheet: secant stiffness at the smallest
// listed strain. The quasi-static solves stay in the few-percent range, so
// the first secant is the right linearization point.
inline Material fit_material(const std::vector<DatasheetPoint>& datasheet,
                             double poisson = 0.45, double density = 1.16) {
  require(!datasheet.empty(), ErrorCode::EmptyDatasheet, "datasheet has no points");
  require(poisson > -1.0 && poisson < 0.5, ErrorCode::NonPhysical,
          "Poisson ratio outside (-1, 0.5)");
  require(density > 0.0, ErrorCode::NonPhysical, "density must be positive");
  const DatasheetPoint* smallest = nullptr;
  for (const auto& p : datasheet) {
    require(p.strain > 0.0 && p.stress > 0.0, ErrorCode::NonPhysical,
            "datasheet strains and stresses must be positive");
    if (!smallest || p.strain < smallest->strain) smallest = &p;
  }
  Material m;
  m.youngs_modulus = smallest->stress / smallest->strain;
  m.poisson = poisson;
  m.density = density;
  return m;
}

inline Material default_material() { return fit_material(default_datasheet()); }

}  // namespace lobeforge
