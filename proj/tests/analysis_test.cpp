#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lobeforge/analysis/anova.hpp"
#include "lobeforge/analysis/shapiro.hpp"
#include "lobeforge/analysis/special_functions.hpp"
#include "lobeforge/analysis/svg_plots.hpp"
#include "lobeforge/analysis/trace_csv.hpp"
#include "lobeforge/analysis/tukey.hpp"
#include "lobeforge/core/rng.hpp"

namespace lobeforge {
namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

TEST(SpecialFunctions, NormalQuantileMatchesReference) {
  struct Case {
    double p, z;
  };
  // Reference values from a double-precision inverse-normal implementation.
  const Case cases[] = {{0.001, -3.090232306168}, {0.025, -1.959963984540},
                        {0.3, -0.524400512708},   {0.5, 0.0},
                        {0.8, 0.841621233573},    {0.975, 1.959963984540},
                        {0.9999, 3.719016485456}};
  for (const auto& c : cases) EXPECT_NEAR(normal_ppf(c.p), c.z, 1e-10);
  for (const auto& c : cases) EXPECT_NEAR(normal_cdf(normal_ppf(c.p)), c.p, 1e-14);
}

TEST(SpecialFunctions, FSurvivalMatchesReference) {
  struct Case {
    double f, d1, d2, sf;
  };
  const Case cases[] = {{471.5, 3, 114, 4.540979493307e-64},
                        {338.3, 3, 115, 7.121016145004e-57},
                        {4.75, 3, 16, 1.486874398055e-02},
                        {1.0, 1, 10, 3.408931323021e-01},
                        {0.5, 2, 20, 6.139132535408e-01},
                        {12.3, 3, 120, 4.514185963265e-07}};
  for (const auto& c : cases) {
    double got = f_survival(c.f, c.d1, c.d2);
    EXPECT_NEAR(got, c.sf, 1e-10 * c.sf) << "F=" << c.f;
  }
  EXPECT_EQ(f_survival(0.0, 3, 10), 1.0);
  EXPECT_EQ(f_survival(-2.0, 3, 10), 1.0);
}

TEST(SpecialFunctions, StudentizedRangeCdfMatchesReference) {
  struct Case {
    double q;
    int k;
    double nu, cdf;
  };
  const Case cases[] = {{3.0, 8, 112, 0.5921036957}, {4.0, 8, 112, 0.9016379180},
                        {1.0, 8, 112, 0.0033613371}, {3.5, 4, 20, 0.9050415495},
                        {2.0, 2, 10, 0.8123301291},  {5.0, 8, 40, 0.9788366561},
                        {0.5, 3, 5, 0.0657014602},   {6.5, 8, 112, 0.9997028392}};
  for (const auto& c : cases) {
    double got = studentized_range_cdf(c.q, c.k, c.nu);
    EXPECT_NEAR(got, c.cdf, 1e-8) << "q=" << c.q << " k=" << c.k << " nu=" << c.nu;
  }
  EXPECT_EQ(studentized_range_cdf(0.0, 4, 10), 0.0);
  EXPECT_GT(studentized_range_cdf(3.0, 4, 1e6), 0.0);  // large-df fallback
}

TEST(SpecialFunctions, DomainErrorsRejected) {
  EXPECT_THROW(normal_ppf(0.0), Error);
  EXPECT_THROW(normal_ppf(1.0), Error);
  EXPECT_THROW(f_survival(1.0, 0.0, 5.0), Error);
  EXPECT_THROW(regularized_incomplete_beta(1.0, 1.0, 1.5), Error);
  EXPECT_THROW(studentized_range_cdf(1.0, 1, 10.0), Error);
  EXPECT_THROW(studentized_range_cdf(1.0, 4, 0.5), Error);
}

struct ShapiroCase {
  const char* name;
  std::vector<double> values;
  double w, p;
};

TEST(Shapiro, MatchesReferenceAcrossDistributions) {
  // Reference W and p values computed with an independent implementation of
  // the same calibration, on samples drawn from several shapes.
  std::vector<ShapiroCase> cases;
  cases.push_back({"normal_n12",
                   {10.967965, 9.892614, 10.933573, 10.404550, 8.622710, 7.044431,
                    12.385140, 9.702177, 6.768453, 7.581346, 10.298936, 11.158459},
                   0.9324446192,
                   0.4067456271});
  cases.push_back({"uniform_n20",
                   {0.264089, 0.736190, 0.018130, 0.618649, 0.511117, 0.104536, 0.027480,
                    0.475358, 0.555266, 0.822785, 0.316961, 0.106696, 0.422819, 0.840984,
                    0.698876, 0.267399, 0.912030, 0.932414, 0.432023, 0.355811},
                   0.9541641028,
                   0.4347365786});
  cases.push_back(
      {"lognormal_n30",
       {0.921291, 0.374384, 0.680639, 2.839132, 1.314628, 2.036741, 0.599287, 0.656059,
        3.107360, 0.623636, 1.591794, 2.633087, 0.488450, 2.490397, 4.949512, 1.648178,
        2.956861, 0.466246, 1.329963, 1.984596, 1.069913, 0.805971, 1.034286, 1.013276,
        0.882584, 1.563718, 2.180880, 0.438188, 3.181248, 0.411453},
       0.8778260865,
       0.0025140507});
  cases.push_back(
      {"normal_n50",
       {-3.120070, -2.667071, -2.796894, -2.436854, -2.329796, -2.676143, -3.164567,
        -1.644910, -3.015915, -2.390829, -2.840110, -2.625846, -3.587699, -3.118760,
        -2.230387, -3.338547, -3.194760, -2.412966, -3.031521, -2.972635, -3.056840,
        -2.582344, -2.613662, -2.491215, -2.740571, -2.934439, -3.122922, -3.117326,
        -2.250090, -3.178349, -2.882441, -3.243827, -3.318634, -3.121585, -3.368983,
        -2.425943, -3.209850, -2.444498, -2.997311, -2.636580, -2.823594, -3.456192,
        -2.837917, -4.083116, -3.430499, -3.229050, -2.773491, -3.096305, -2.281761,
        -2.694062},
       0.9801247267,
       0.5572363802});
  cases.push_back({"exponential_n8",
                   {1.786497, 0.115820, 0.890466, 0.067460, 3.495998, 0.393116, 2.767919,
                    7.173266},
                   0.8370880061,
                   0.0702994127});
  cases.push_back({"bimodal_n25",
                   {0.256355, 0.361931, 0.098002,  0.617989, -0.241969, -0.583336, -0.149838,
                    0.398870, 0.903329, -0.148564, -0.026974, 0.057254,  0.250163,  4.140930,
                    4.407813, 3.935862, 4.121268,  4.691981, 4.011731,  3.787588,  4.221686,
                    3.615627, 4.173818, 4.170915,  4.248547},
                   0.7743662736,
                   0.0000874852});
  {
    std::vector<double> q(40);
    for (int i = 0; i < 40; ++i) q[i] = normal_ppf((i + 1 - 0.375) / (40 + 0.25));
    cases.push_back({"quantile_n40", q, 0.9981899735, 0.9999999857});
  }
  for (const auto& c : cases) {
    ShapiroResult r = shapiro_wilk(c.values);
    EXPECT_NEAR(r.w, c.w, 1e-6) << c.name;
    EXPECT_NEAR(r.p_value, c.p, 1e-6) << c.name;
  }
}

TEST(Shapiro, RejectsUnusableSamples) {
  try {
    shapiro_wilk({1.0, 2.0});
    FAIL() << "expected SampleTooSmall";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SampleTooSmall);
  }
  std::vector<double> huge(5000);
  for (size_t i = 0; i < huge.size(); ++i) huge[i] = static_cast<double>(i % 97);
  try {
    shapiro_wilk(huge);
    FAIL() << "expected SampleTooSmall";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SampleTooSmall);
  }
  try {
    shapiro_wilk({3.0, 3.0, 3.0, 3.0});
    FAIL() << "expected EmptyData";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyData);
  }
}

std::vector<FactorSample> synthetic_design(const std::vector<int>& cell_sizes) {
  // 4 x 2 crossed design with level effects, interaction, and noise.
  const char* a_levels[] = {"atl-constant", "atl-tapered", "sg-constant", "sg-tapered"};
  const char* b_levels[] = {"loading", "snapping"};
  double a_effect[] = {0.0, 1.3, -0.7, 2.1};
  double b_effect[] = {0.0, 4.0};
  double ab_effect[4][2] = {{0.0, 0.2}, {-0.3, 0.5}, {0.4, -0.1}, {0.1, 0.6}};
  SplitMix64 rng(991);
  std::vector<FactorSample> samples;
  int cell = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 2; ++j) {
      int n = cell_sizes[cell++ % cell_sizes.size()];
      for (int r = 0; r < n; ++r) {
        FactorSample s;
        s.level_a = a_levels[i];
        s.level_b = b_levels[j];
        s.value = 10.0 + a_effect[i] + b_effect[j] + ab_effect[i][j] +
                  0.8 * (rng.uniform() - 0.5);
        samples.push_back(s);
      }
    }
  }
  return samples;
}

TEST(Anova, MatchesBruteForceOnBalancedDesign) {
  std::vector<FactorSample> samples = synthetic_design({6});
  AnovaTable table = two_way_anova(samples);
  EXPECT_TRUE(table.balanced);
  EXPECT_EQ(table.factor_a.df, 3);
  EXPECT_EQ(table.factor_b.df, 1);
  EXPECT_EQ(table.interaction.df, 3);
  EXPECT_EQ(table.residual.df, static_cast<int>(samples.size()) - 8);

  // Independent accumulation: every observation contributes the squared
  // deviation of the relevant fitted mean.
  std::map<std::string, std::pair<double, int>> sum_a, sum_b;
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> sum_ab;
  double grand = 0.0;
  for (const auto& s : samples) {
    sum_a[s.level_a].first += s.value;
    sum_a[s.level_a].second++;
    sum_b[s.level_b].first += s.value;
    sum_b[s.level_b].second++;
    sum_ab[{s.level_a, s.level_b}].first += s.value;
    sum_ab[{s.level_a, s.level_b}].second++;
    grand += s.value;
  }
  grand /= samples.size();
  double ss_a = 0.0, ss_b = 0.0, ss_ab = 0.0, ss_e = 0.0, ss_total = 0.0;
  for (const auto& s : samples) {
    double ma = sum_a[s.level_a].first / sum_a[s.level_a].second;
    double mb = sum_b[s.level_b].first / sum_b[s.level_b].second;
    auto& cell = sum_ab[{s.level_a, s.level_b}];
    double mab = cell.first / cell.second;
    ss_a += (ma - grand) * (ma - grand);
    ss_b += (mb - grand) * (mb - grand);
    ss_ab += (mab - ma - mb + grand) * (mab - ma - mb + grand);
    ss_e += (s.value - mab) * (s.value - mab);
    ss_total += (s.value - grand) * (s.value - grand);
  }
  EXPECT_NEAR(table.factor_a.ss, ss_a, 1e-8);
  EXPECT_NEAR(table.factor_b.ss, ss_b, 1e-8);
  EXPECT_NEAR(table.interaction.ss, ss_ab, 1e-8);
  EXPECT_NEAR(table.residual.ss, ss_e, 1e-8);
  EXPECT_NEAR(ss_a + ss_b + ss_ab + ss_e, ss_total, 1e-8);

  EXPECT_NEAR(table.factor_a.p_value,
              f_survival(table.factor_a.f, 3, table.residual.df), 1e-14);
  EXPECT_GT(table.factor_b.f, table.interaction.f);  // main effect dominates
}

TEST(Anova, UnbalancedFallsBackToUnweightedMeans) {
  std::vector<FactorSample> samples = synthetic_design({16, 15, 15, 15, 16, 15, 15, 16});
  AnovaTable table = two_way_anova(samples);
  EXPECT_FALSE(table.balanced);
  EXPECT_FALSE(table.weighting_note.empty());
  EXPECT_EQ(table.interaction.df, 3);

  // Recompute the factor-a sum of squares from cell means and the harmonic
  // mean cell size.
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> cells;
  for (const auto& s : samples) {
    cells[{s.level_a, s.level_b}].first += s.value;
    cells[{s.level_a, s.level_b}].second++;
  }
  double inv = 0.0;
  for (const auto& [key, cell] : cells) inv += 1.0 / cell.second;
  double harmonic = 8.0 / inv;
  std::map<std::string, double> mean_a;
  double grand = 0.0;
  for (const auto& [key, cell] : cells) {
    double m = cell.first / cell.second;
    mean_a[key.first] += m / 2.0;
    grand += m / 8.0;
  }
  double ss_a = 0.0;
  for (const auto& [key, m] : mean_a) ss_a += harmonic * 2.0 * (m - grand) * (m - grand);
  EXPECT_NEAR(table.factor_a.ss, ss_a, 1e-8);
}

TEST(Anova, DegenerateDesignsRejected) {
  std::vector<FactorSample> missing = {{"a1", "b1", 1.0}, {"a1", "b2", 2.0},
                                       {"a2", "b1", 3.0}, {"a1", "b1", 1.5},
                                       {"a1", "b2", 2.5}, {"a2", "b1", 3.5}};
  try {
    two_way_anova(missing);
    FAIL() << "expected DegenerateDesign";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDesign);
  }

  std::vector<FactorSample> single_level = {{"a1", "b1", 1.0}, {"a1", "b2", 2.0},
                                            {"a1", "b1", 1.5}, {"a1", "b2", 2.5}};
  EXPECT_THROW(two_way_anova(single_level), Error);

  std::vector<FactorSample> no_replicates = {
      {"a1", "b1", 1.0}, {"a1", "b2", 2.0}, {"a2", "b1", 3.0}, {"a2", "b2", 4.0}};
  try {
    two_way_anova(no_replicates);
    FAIL() << "expected DegenerateDesign";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDesign);
  }
  EXPECT_THROW(two_way_anova({}), Error);
}

TEST(Anova, ZeroResidualVarianceHandled) {
  std::vector<FactorSample> separated;
  for (int r = 0; r < 3; ++r) {
    separated.push_back({"a1", "b1", 1.0});
    separated.push_back({"a1", "b2", 2.0});
    separated.push_back({"a2", "b1", 3.0});
    separated.push_back({"a2", "b2", 4.0});
  }
  AnovaTable table = two_way_anova(separated);
  EXPECT_TRUE(std::isinf(table.factor_a.f));
  EXPECT_EQ(table.factor_a.p_value, 0.0);
  EXPECT_EQ(table.interaction.f, 0.0);  // perfectly additive cells
  EXPECT_EQ(table.interaction.p_value, 1.0);

  std::vector<FactorSample> constant;
  for (int r = 0; r < 3; ++r) {
    constant.push_back({"a1", "b1", 5.0});
    constant.push_back({"a1", "b2", 5.0});
    constant.push_back({"a2", "b1", 5.0});
    constant.push_back({"a2", "b2", 5.0});
  }
  AnovaTable flat = two_way_anova(constant);
  EXPECT_EQ(flat.factor_a.f, 0.0);
  EXPECT_EQ(flat.factor_a.p_value, 1.0);
}

TEST(Tukey, IdenticalGroupsGiveUnitPValue) {
  std::vector<GroupSample> samples;
  const char* groups[] = {"g1", "g2", "g3"};
  double base[] = {4.1, 5.2, 3.9, 4.8, 5.0};
  for (const char* g : groups)
    for (double v : base) samples.push_back({g, v});
  auto comparisons = tukey_hsd(samples);
  ASSERT_EQ(comparisons.size(), 3u);
  for (const auto& c : comparisons) {
    EXPECT_EQ(c.difference, 0.0);
    EXPECT_GT(c.p_value, 0.99);
  }
}

TEST(Tukey, StatisticMatchesHandComputation) {
  std::vector<GroupSample> samples;
  double g1[] = {1.0, 1.2, 0.8, 1.1};
  double g2[] = {2.0, 2.3, 1.9};
  double g3[] = {1.4, 1.6, 1.5, 1.3, 1.7};
  for (double v : g1) samples.push_back({"g1", v});
  for (double v : g2) samples.push_back({"g2", v});
  for (double v : g3) samples.push_back({"g3", v});
  auto comparisons = tukey_hsd(samples);
  ASSERT_EQ(comparisons.size(), 3u);

  double m1 = (1.0 + 1.2 + 0.8 + 1.1) / 4.0;
  double m2 = (2.0 + 2.3 + 1.9) / 3.0;
  double m3 = (1.4 + 1.6 + 1.5 + 1.3 + 1.7) / 5.0;
  double ss = 0.0;
  for (double v : g1) ss += (v - m1) * (v - m1);
  for (double v : g2) ss += (v - m2) * (v - m2);
  for (double v : g3) ss += (v - m3) * (v - m3);
  double ms = ss / (12 - 3);

  const TukeyComparison* pair12 = nullptr;
  for (const auto& c : comparisons)
    if (c.group_i == "g1" && c.group_j == "g2") pair12 = &c;
  ASSERT_NE(pair12, nullptr);
  double q = std::abs(m1 - m2) / std::sqrt(0.5 * ms * (1.0 / 4.0 + 1.0 / 3.0));
  EXPECT_NEAR(pair12->q, q, 1e-12);
  EXPECT_NEAR(pair12->p_value, 1.0 - studentized_range_cdf(q, 3, 9.0), 1e-12);
  EXPECT_LT(pair12->p_value, 0.05);  // clearly separated groups
}

TEST(Tukey, DegenerateInputsRejected) {
  EXPECT_THROW(tukey_hsd({}), Error);
  std::vector<GroupSample> one_group = {{"g", 1.0}, {"g", 2.0}};
  try {
    tukey_hsd(one_group);
    FAIL() << "expected DegenerateDesign";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDesign);
  }
  std::vector<GroupSample> no_df = {{"g1", 1.0}, {"g2", 2.0}};
  EXPECT_THROW(tukey_hsd(no_df), Error);
}

TEST(TraceCsv, RoundTripsExactly) {
  std::vector<TracePoint> trace;
  SplitMix64 rng(7);
  for (int i = 0; i < 50; ++i) {
    TracePoint p;
    p.time_s = i * 0.025;
    p.stroke_mm = i * 0.2 + 1e-7 * rng.uniform();
    p.force_n = std::sin(i * 0.3) * 2.75 + rng.uniform();
    trace.push_back(p);
  }
  auto path = temp_file("lobeforge_trace_roundtrip.csv");
  write_force_trace(path.string(), trace);
  auto back = read_force_trace(path.string());
  ASSERT_EQ(back.size(), trace.size());
  for (size_t i = 0; i < trace.size(); ++i) {
    EXPECT_EQ(back[i].time_s, trace[i].time_s);
    EXPECT_EQ(back[i].stroke_mm, trace[i].stroke_mm);
    EXPECT_EQ(back[i].force_n, trace[i].force_n);
  }
  std::filesystem::remove(path);
}

TEST(TraceCsv, ObservationsRoundTrip) {
  std::vector<Observation> obs = {{"atl-constant", "loading", "peak_force_n", 2.824},
                                  {"sg-tapered", "snapping", "work_mj", 0.731}};
  auto path = temp_file("lobeforge_obs_roundtrip.csv");
  write_observations(path.string(), obs);
  auto back = read_observations(path.string());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].actuator, "atl-constant");
  EXPECT_EQ(back[1].metric, "work_mj");
  EXPECT_EQ(back[1].value, 0.731);
  std::filesystem::remove(path);
}

TEST(TraceCsv, MalformedInputsRejected) {
  EXPECT_THROW(read_force_trace("/nonexistent/trace.csv"), Error);

  auto path = temp_file("lobeforge_trace_bad.csv");
  auto write_text = [&](const std::string& text) {
    std::ofstream out(path);
    out << text;
  };

  write_text("stroke,force\n1,2\n");
  try {
    read_force_trace(path.string());
    FAIL() << "expected FormatError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
  }

  write_text("time_s,stroke_mm,force_n\n");
  try {
    read_force_trace(path.string());
    FAIL() << "expected EmptyData";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyData);
  }

  write_text("time_s,stroke_mm,force_n\n0.0,1.0,abc\n");
  EXPECT_THROW(read_force_trace(path.string()), Error);

  write_text("time_s,stroke_mm,force_n\n0.0,1.0\n");
  EXPECT_THROW(read_force_trace(path.string()), Error);

  std::filesystem::remove(path);
}

TEST(SvgPlots, BoxplotDeterministicWithOutliers) {
  std::vector<BoxplotSeries> series(2);
  series[0].label = "atl";
  series[0].values = {2.0, 2.2, 2.1, 2.3, 1.9, 2.05, 8.0};  // one far outlier
  series[1].label = "sg";
  series[1].values = {3.0, 3.1, 2.9, 3.2, 3.05};
  std::string a = boxplot_svg(series, "peak force", "force [N]");
  std::string b = boxplot_svg(series, "peak force", "force [N]");
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("<svg xmlns"), std::string::npos);
  EXPECT_NE(a.find("<circle"), std::string::npos);  // the outlier dot
  EXPECT_NE(a.find(">atl<"), std::string::npos);
  EXPECT_NE(a.find(">sg<"), std::string::npos);

  EXPECT_THROW(boxplot_svg({}, "t", "y"), Error);
  std::vector<BoxplotSeries> empty_series(1);
  empty_series[0].label = "x";
  EXPECT_THROW(boxplot_svg(empty_series, "t", "y"), Error);
}

TEST(SvgPlots, ForceStrokeShowsTransitionMarkers) {
  ForceStrokeSeries s;
  s.label = "run-1";
  for (int i = 0; i <= 40; ++i) {
    TracePoint p;
    p.time_s = i * 0.05;
    p.stroke_mm = i * 0.25;
    p.force_n = std::sin(i * 0.2) + 1.2;
    s.trace.push_back(p);
  }
  s.has_first_transition = true;
  s.first_transition_stroke = 3.5;
  s.has_second_transition = true;
  s.second_transition_stroke = 7.25;

  std::string a = force_stroke_svg({s}, "indentation");
  EXPECT_EQ(a, force_stroke_svg({s}, "indentation"));
  EXPECT_NE(a.find(">X1<"), std::string::npos);
  EXPECT_NE(a.find(">X2<"), std::string::npos);
  EXPECT_NE(a.find("<polyline"), std::string::npos);
  EXPECT_NE(a.find("run-1"), std::string::npos);
}

}  // namespace
}  // namespace lobeforge
