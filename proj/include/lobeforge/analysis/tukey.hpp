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

struct GroupSample {
  std::string group;
  double value = 0.0;
};

struct TukeyComparison {
  std::string group_i;
  std::string group_j;
  double mean_i = 0.0;
  double mean_j = 0.0;
  double difference = 0.0;  // mean_i - mean_j
  double q = 0.0;
  double p_value = 1.0;
};

// All-pairs Tukey honest significant difference test with the Kramer
// adjustment for unequal group sizes. The within-group mean square comes
// from a one-way decomposition over the same groups; each adjusted p-value
// is the studentized-range tail of the pair's q statistic.
inline std::vector<TukeyComparison> tukey_hsd(const std::vector<GroupSample>& samples) {
  require(!samples.empty(), ErrorCode::EmptyData, "no observations");
  std::map<std::string, std::vector<double>> groups;
  for (const auto& s : samples) groups[s.group].push_back(s.value);
  int k = static_cast<int>(groups.size());
  require(k >= 2, ErrorCode::DegenerateDesign, "need at least two groups to compare");
  int total = static_cast<int>(samples.size());
  int df_e = total - k;
  require(df_e >= 1, ErrorCode::DegenerateDesign,
          "no within-group degrees of freedom; need replicate observations");

  std::vector<std::string> names;
  std::vector<double> means;
  std::vector<int> counts;
  double ss_within = 0.0;
  for (const auto& [name, values] : groups) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    for (double v : values) ss_within += (v - mean) * (v - mean);
    names.push_back(name);
    means.push_back(mean);
    counts.push_back(static_cast<int>(values.size()));
  }
  double ms_within = ss_within / df_e;

  std::vector<TukeyComparison> out;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      TukeyComparison cmp;
      cmp.group_i = names[i];
      cmp.group_j = names[j];
      cmp.mean_i = means[i];
      cmp.mean_j = means[j];
      cmp.difference = means[i] - means[j];
      double gap = std::abs(cmp.difference);
      if (gap == 0.0) {
        cmp.q = 0.0;
        cmp.p_value = 1.0;
      } else if (ms_within == 0.0) {
        cmp.q = std::numeric_limits<double>::infinity();
        cmp.p_value = 0.0;
      } else {
        double se = std::sqrt(0.5 * ms_within * (1.0 / counts[i] + 1.0 / counts[j]));
        cmp.q = gap / se;
        cmp.p_value =
            std::clamp(1.0 - studentized_range_cdf(cmp.q, k, df_e), 0.0, 1.0);
      }
      out.push_back(cmp);
    }
  }
  return out;
}

}  // namespace lobeforge
