#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lobeforge/analysis/special_functions.hpp"
#include "lobeforge/core/error.hpp"

namespace lobeforge {

struct FactorSample {
  std::string level_a;
  std::string level_b;
  double value = 0.0;
};

struct AnovaRow {
  double ss = 0.0;
  int df = 0;
  double ms = 0.0;
  double f = 0.0;
  double p_value = 1.0;
};

struct AnovaTable {
  std::vector<std::string> levels_a;
  std::vector<std::string> levels_b;
  AnovaRow factor_a;
  AnovaRow factor_b;
  AnovaRow interaction;
  AnovaRow residual;
  bool balanced = true;
  // Set for unbalanced designs, where effects are tested on unweighted
  // cell means with a harmonic-mean cell size.
  std::string weighting_note;
};

namespace detail {

inline AnovaRow finish_row(double ss, int df, double ms_e, double df_e) {
  AnovaRow row;
  row.ss = ss;
  row.df = df;
  row.ms = df > 0 ? ss / df : 0.0;
  if (ms_e > 0.0) {
    row.f = row.ms / ms_e;
    row.p_value = f_survival(row.f, df, df_e);
  } else if (row.ss > 0.0) {
    row.f = std::numeric_limits<double>::infinity();
    row.p_value = 0.0;
  } else {
    row.f = 0.0;
    row.p_value = 1.0;
  }
  return row;
}

}  // namespace detail

// Two-factor analysis of variance with interaction, on a fully crossed
// design. Balanced designs use the textbook decomposition; unbalanced ones
// fall back to unweighted cell means with the harmonic mean of the cell
// sizes, which keeps main effects orthogonal at the cost of testing the
// unweighted rather than the observed marginals.
inline AnovaTable two_way_anova(const std::vector<FactorSample>& samples) {
  require(!samples.empty(), ErrorCode::EmptyData, "no observations");
  std::map<std::string, int> index_a, index_b;
  for (const auto& s : samples) {
    index_a.emplace(s.level_a, 0);
    index_b.emplace(s.level_b, 0);
  }
  int na = static_cast<int>(index_a.size());
  int nb = static_cast<int>(index_b.size());
  require(na >= 2 && nb >= 2, ErrorCode::DegenerateDesign,
          "each factor needs at least two levels");
  {
    int i = 0;
    for (auto& [key, idx] : index_a) idx = i++;
    i = 0;
    for (auto& [key, idx] : index_b) idx = i++;
  }

  std::vector<std::vector<std::vector<double>>> cells(
      na, std::vector<std::vector<double>>(nb));
  for (const auto& s : samples)
    cells[index_a[s.level_a]][index_b[s.level_b]].push_back(s.value);

  int total = static_cast<int>(samples.size());
  int n0 = static_cast<int>(cells[0][0].size());
  bool balanced = true;
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      require(!cells[i][j].empty(), ErrorCode::DegenerateDesign,
              "design is not fully crossed: empty cell");
      if (static_cast<int>(cells[i][j].size()) != n0) balanced = false;
    }
  }
  int df_e = total - na * nb;
  require(df_e > 0, ErrorCode::DegenerateDesign,
          "no residual degrees of freedom; need replicate observations");

  std::vector<std::vector<double>> cell_mean(na, std::vector<double>(nb, 0.0));
  double ss_e = 0.0;
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      double mean = 0.0;
      for (double v : cells[i][j]) mean += v;
      mean /= cells[i][j].size();
      cell_mean[i][j] = mean;
      for (double v : cells[i][j]) ss_e += (v - mean) * (v - mean);
    }
  }

  double ss_a = 0.0, ss_b = 0.0, ss_ab = 0.0;
  if (balanced) {
    double grand = 0.0;
    for (const auto& s : samples) grand += s.value;
    grand /= total;
    std::vector<double> mean_a(na, 0.0), mean_b(nb, 0.0);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) {
        mean_a[i] += cell_mean[i][j] / nb;
        mean_b[j] += cell_mean[i][j] / na;
      }
    for (int i = 0; i < na; ++i) ss_a += nb * n0 * (mean_a[i] - grand) * (mean_a[i] - grand);
    for (int j = 0; j < nb; ++j) ss_b += na * n0 * (mean_b[j] - grand) * (mean_b[j] - grand);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) {
        double dev = cell_mean[i][j] - mean_a[i] - mean_b[j] + grand;
        ss_ab += n0 * dev * dev;
      }
  } else {
    double inv_sum = 0.0;
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) inv_sum += 1.0 / cells[i][j].size();
    double harmonic = na * nb / inv_sum;
    double grand = 0.0;
    std::vector<double> mean_a(na, 0.0), mean_b(nb, 0.0);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) {
        grand += cell_mean[i][j] / (na * nb);
        mean_a[i] += cell_mean[i][j] / nb;
        mean_b[j] += cell_mean[i][j] / na;
      }
    for (int i = 0; i < na; ++i)
      ss_a += harmonic * nb * (mean_a[i] - grand) * (mean_a[i] - grand);
    for (int j = 0; j < nb; ++j)
      ss_b += harmonic * na * (mean_b[j] - grand) * (mean_b[j] - grand);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) {
        double dev = cell_mean[i][j] - mean_a[i] - mean_b[j] + grand;
        ss_ab += harmonic * dev * dev;
      }
  }

  AnovaTable table;
  for (const auto& [key, idx] : index_a) table.levels_a.push_back(key);
  for (const auto& [key, idx] : index_b) table.levels_b.push_back(key);
  table.balanced = balanced;
  if (!balanced)
    table.weighting_note =
        "unbalanced design: effects tested on unweighted cell means with "
        "harmonic-mean cell size";
  double ms_e = ss_e / df_e;
  table.residual.ss = ss_e;
  table.residual.df = df_e;
  table.residual.ms = ms_e;
  table.factor_a = detail::finish_row(ss_a, na - 1, ms_e, df_e);
  table.factor_b = detail::finish_row(ss_b, nb - 1, ms_e, df_e);
  table.interaction = detail::finish_row(ss_ab, (na - 1) * (nb - 1), ms_e, df_e);
  return table;
}

}  // namespace lobeforge
