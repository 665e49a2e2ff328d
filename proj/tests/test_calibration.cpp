#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ptq/calibration.hpp"
#include "ptq/npy.hpp"
#include "test_util.hpp"

using namespace ptq;
using ptq::testing::TempDir;

namespace {

// Independent Top-k reduction: full sort, then explicit slices.
std::pair<double, double> reference_range(std::vector<double> v, ClipStrategy s, std::size_t k) {
  std::sort(v.begin(), v.end());
  std::vector<double> lo(v.begin(), v.begin() + k), hi(v.end() - k, v.end());
  auto reduce = [&](const std::vector<double>& xs) {
    if (s == ClipStrategy::Average) return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
  };
  return {reduce(lo), reduce(hi)};
}

DumpManifest length_manifest(const std::vector<std::uint64_t>& lengths) {
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "seq%05zu", i);
    entries.push_back({id, std::string(id) + ".npy", std::string(id) + ".npy", "act", lengths[i]});
  }
  return DumpManifest(entries);
}

}  // namespace

TEST(EstimateRange, MedianTopThree) {
  std::vector<double> v{1, 2, 3, 100};
  auto r = estimate_range(v, {ClipStrategy::Median, 3});
  EXPECT_EQ(r.r_l, 2);
  EXPECT_EQ(r.r_u, 3);
  EXPECT_EQ(r.sample_count, 4u);
  EXPECT_EQ(r.config_used.k, 3u);
}

TEST(EstimateRange, AverageTopThree) {
  std::vector<double> v{100, 3, 1, 2};
  auto r = estimate_range(v, {ClipStrategy::Average, 3});
  EXPECT_EQ(r.r_l, 2);
  EXPECT_EQ(r.r_u, 35);
}

TEST(EstimateRange, EvenMedianAveragesMiddlePair) {
  std::vector<double> v{0, 1, 4, 9, 16, 25};
  auto r = estimate_range(v, {ClipStrategy::Median, 2});
  EXPECT_EQ(r.r_l, 0.5);
  EXPECT_EQ(r.r_u, 20.5);
}

TEST(EstimateRange, TopOneIsMinMax) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(2, 5);
  std::vector<double> v(777);
  for (auto& x : v) x = d(rng);
  auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  for (auto s : {ClipStrategy::Median, ClipStrategy::Average}) {
    auto r = estimate_range(v, {s, 1});
    EXPECT_EQ(r.r_l, *mn);
    EXPECT_EQ(r.r_u, *mx);
  }
}

TEST(EstimateRange, MatchesSortReference) {
  std::mt19937_64 rng(2);
  std::student_t_distribution<double> d(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + rng() % 500);
    for (auto& x : v) x = d(rng);
    std::size_t k = 1 + rng() % v.size();
    for (auto s : {ClipStrategy::Median, ClipStrategy::Average}) {
      auto r = estimate_range(v, {s, k});
      auto [lo, hi] = reference_range(v, s, k);
      EXPECT_NEAR(r.r_l, lo, 1e-12 * (1 + std::abs(lo)));
      EXPECT_NEAR(r.r_u, hi, 1e-12 * (1 + std::abs(hi)));
    }
  }
}

TEST(EstimateRange, ReportsMoments) {
  std::vector<double> v{1, 2, 3, 4};
  auto r = estimate_range(v, {ClipStrategy::Median, 1});
  EXPECT_DOUBLE_EQ(r.mean, 2.5);
  EXPECT_DOUBLE_EQ(r.stddev, std::sqrt(1.25));
}

TEST(EstimateRange, ConstantSamplesGiveDegenerateRange) {
  std::vector<double> v(10, 4.0);
  auto r = estimate_range(v, {ClipStrategy::Median, 5});
  EXPECT_EQ(r.r_l, 4.0);
  EXPECT_EQ(r.r_u, 4.0);
}

TEST(EstimateRange, Errors) {
  std::vector<double> empty;
  EXPECT_PTQ_ERROR(estimate_range(empty, {}), Errc::EmptySamples);
  std::vector<double> four{1, 2, 3, 4};
  EXPECT_PTQ_ERROR(estimate_range(four, {ClipStrategy::Median, 5}), Errc::KExceedsSamples);
  EXPECT_PTQ_ERROR(estimate_range(four, {ClipStrategy::Median, 0}), Errc::InvalidConfig);
  std::vector<double> bad{1, NAN};
  EXPECT_PTQ_ERROR(estimate_range(bad, {ClipStrategy::Median, 1}), Errc::NonFiniteValue);
}

TEST(EstimateRangeProperty, LargerKNeverWidens) {
  std::mt19937_64 rng(3);
  std::cauchy_distribution<double> d;
  std::vector<double> v(1000);
  for (auto& x : v) x = d(rng);
  for (auto s : {ClipStrategy::Median, ClipStrategy::Average}) {
    auto prev = estimate_range(v, {s, 1});
    for (std::size_t k = 2; k <= 1000; k += 7) {
      auto cur = estimate_range(v, {s, k});
      ASSERT_GE(cur.r_l, prev.r_l) << k;
      ASSERT_LE(cur.r_u, prev.r_u) << k;
      prev = cur;
    }
  }
}

TEST(EstimateRangeProperty, MedianIgnoresSizeOfLargestValue) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d;
  std::vector<double> v(1000);
  for (auto& x : v) x = d(rng);
  auto top = std::max_element(v.begin(), v.end());
  for (std::size_t k : {3, 4, 5, 50}) {
    auto base = estimate_range(v, {ClipStrategy::Median, k});
    for (double bump : {1.0, 1e3, 1e12}) {
      auto w = v;
      w[top - v.begin()] = *top + bump;
      EXPECT_EQ(estimate_range(w, {ClipStrategy::Median, k}).r_u, base.r_u);
      EXPECT_NE(estimate_range(w, {ClipStrategy::Average, k}).r_u,
                estimate_range(v, {ClipStrategy::Average, k}).r_u);
    }
  }
}

TEST(Sampling, PreferShortAndLongTakeExtremes) {
  std::vector<std::uint64_t> lengths{50, 10, 100, 30, 20, 90, 70, 60, 40, 80, 30};
  auto m = length_manifest(lengths);
  auto shortest = sample_calibration(m, 3, {SamplingKind::PreferShort, 0});
  EXPECT_EQ(shortest, (std::vector<std::string>{"seq00001", "seq00004", "seq00003"}));
  auto longest = sample_calibration(m, 2, {SamplingKind::PreferLong, 0});
  EXPECT_EQ(longest, (std::vector<std::string>{"seq00002", "seq00005"}));
  // Tie at length 30 is broken by id.
  auto four = sample_calibration(m, 4, {SamplingKind::PreferShort, 0});
  EXPECT_EQ(four.back(), "seq00010");
}

TEST(Sampling, PreferShortWholeDecade) {
  std::vector<std::uint64_t> lengths;
  for (int i = 1; i <= 30; ++i) lengths.push_back(10 * ((i - 1) % 10 + 1));
  auto m = length_manifest(lengths);
  auto ids = sample_calibration(m, 3, {SamplingKind::PreferShort, 0});
  for (const auto& id : ids) EXPECT_EQ(m.entry(id).seq_len, 10u);
}

TEST(Sampling, UniformHitsEveryDecile) {
  std::vector<std::uint64_t> lengths(1000);
  std::iota(lengths.begin(), lengths.end(), 1);
  auto m = length_manifest(lengths);
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    auto ids = sample_calibration(m, 10, {SamplingKind::Uniform, seed, 10});
    ASSERT_EQ(ids.size(), 10u);
    std::set<std::size_t> bins;
    for (const auto& id : ids) {
      double len = static_cast<double>(m.entry(id).seq_len);
      std::size_t bin = std::min<std::size_t>(9, static_cast<std::size_t>((len - 1) / (999.0 / 10)));
      bins.insert(bin);
    }
    EXPECT_EQ(bins.size(), 10u) << seed;
  }
}

TEST(Sampling, SingleLengthUniformIsSeeded) {
  auto m = length_manifest(std::vector<std::uint64_t>(20, 64));
  auto a = sample_calibration(m, 3, {SamplingKind::Uniform, 7});
  EXPECT_EQ(a, sample_calibration(m, 3, {SamplingKind::Uniform, 7}));
  EXPECT_EQ(std::set<std::string>(a.begin(), a.end()).size(), 3u);
}

TEST(Sampling, EverySizeAndModeReturnsDistinctIds) {
  std::mt19937_64 rng(5);
  std::vector<std::uint64_t> lengths(200);
  for (auto& l : lengths) l = 1 + rng() % 300;
  lengths[7] = 0;  // weights-style entry without length is never selected
  auto m = length_manifest(lengths);
  for (auto kind : {SamplingKind::Random, SamplingKind::PreferShort, SamplingKind::PreferLong,
                    SamplingKind::Uniform}) {
    for (std::size_t size : {1, 16, 100, 199}) {
      auto ids = sample_calibration(m, size, {kind, 42});
      ASSERT_EQ(ids.size(), size);
      std::set<std::string> unique(ids.begin(), ids.end());
      ASSERT_EQ(unique.size(), size);
      EXPECT_FALSE(unique.count("seq00007"));
      EXPECT_EQ(ids, sample_calibration(m, size, {kind, 42}));
    }
  }
}

TEST(Sampling, RandomDependsOnSeed) {
  std::vector<std::uint64_t> lengths(100, 10);
  auto m = length_manifest(lengths);
  EXPECT_NE(sample_calibration(m, 10, {SamplingKind::Random, 1}),
            sample_calibration(m, 10, {SamplingKind::Random, 2}));
}

TEST(Sampling, Errors) {
  auto m = length_manifest({5, 6, 7});
  EXPECT_PTQ_ERROR(sample_calibration(m, 4, {}), Errc::SizeExceedsPopulation);
  EXPECT_PTQ_ERROR(sample_calibration(m, 0, {}), Errc::InvalidConfig);
  EXPECT_PTQ_ERROR(sample_calibration(length_manifest({0, 0}), 1, {}), Errc::NoLengthData);
  try {
    sample_calibration(m, 10, {});
  } catch (const Error& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("10"), std::string::npos);
    EXPECT_NE(msg.find("3"), std::string::npos);
  }
}

TEST(SamplingNames, RoundTrip) {
  for (auto k : {SamplingKind::Random, SamplingKind::PreferShort, SamplingKind::PreferLong,
                 SamplingKind::Uniform}) {
    EXPECT_EQ(parse_sampling_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_clip_strategy("median"), ClipStrategy::Median);
  EXPECT_EQ(parse_clip_strategy("average"), ClipStrategy::Average);
  EXPECT_PTQ_ERROR(parse_sampling_kind("longest"), Errc::InvalidConfig);
  EXPECT_PTQ_ERROR(parse_clip_strategy("mode"), Errc::InvalidConfig);
}

namespace {

DumpManifest two_tensor_dump(const TempDir& dir) {
  std::vector<double> a(10), b(10);
  std::iota(a.begin(), a.end(), 0.0);
  std::iota(b.begin(), b.end(), 10.0);
  save_npy(Tensor::vector(a), dir / "a.npy", Precision::F64);
  save_npy(Tensor::vector(b), dir / "b.npy", Precision::F64);
  return DumpManifest({{"s0/ln_in", dir / "a.npy", "a.npy", "ln_in", 10},
                       {"s1/ln_in", dir / "b.npy", "b.npy", "ln_in", 10}},
                      dir.path());
}

}  // namespace

TEST(CalibrateAll, GroupedPoolsByTag) {
  TempDir dir;
  auto m = two_tensor_dump(dir);
  auto reg = calibrate_all(m, {"s0/ln_in", "s1/ln_in"}, {ClipStrategy::Median, 1}, true);
  ASSERT_EQ(reg.size(), 1u);
  EXPECT_EQ(reg.at("ln_in").r_l, 0);
  EXPECT_EQ(reg.at("ln_in").r_u, 19);
  EXPECT_EQ(reg.at("ln_in").sample_count, 20u);
}

TEST(CalibrateAll, UngroupedKeysByTensor) {
  TempDir dir;
  auto m = two_tensor_dump(dir);
  auto reg = calibrate_all(m, {"s0/ln_in", "s1/ln_in"}, {ClipStrategy::Median, 1}, false);
  ASSERT_EQ(reg.size(), 2u);
  EXPECT_EQ(reg.at("s0/ln_in").r_l, 0);
  EXPECT_EQ(reg.at("s0/ln_in").r_u, 9);
  EXPECT_EQ(reg.at("s1/ln_in").r_l, 10);
  EXPECT_EQ(reg.at("s1/ln_in").r_u, 19);
  auto single = calibrate_all(m, {"s1/ln_in"}, {ClipStrategy::Median, 1}, false);
  EXPECT_EQ(single.entries().begin()->first, "s1/ln_in");
}

TEST(CalibrateAll, Errors) {
  TempDir dir;
  auto m = two_tensor_dump(dir);
  EXPECT_PTQ_ERROR(calibrate_all(m, {"nope"}, {}), Errc::UnknownTensorId);
  EXPECT_PTQ_ERROR(calibrate_all(m, {"s0/ln_in"}, {ClipStrategy::Median, 11}), Errc::KExceedsSamples);
  std::filesystem::remove(dir / "b.npy");
  EXPECT_PTQ_ERROR(calibrate_all(m, {"s1/ln_in"}, {}), Errc::MissingTensorFile);
}

TEST(RangeRegistry, LookupPrefersTensorId) {
  RangeRegistry reg;
  reg.set("ln_in", {0, 1});
  reg.set("s0/ln_in", {5, 6});
  EXPECT_EQ(reg.find("s0/ln_in", "ln_in")->r_l, 5);
  EXPECT_EQ(reg.find("s9/ln_in", "ln_in")->r_l, 0);
  EXPECT_FALSE(reg.find("x", "y").has_value());
  EXPECT_PTQ_ERROR(reg.at("y"), Errc::MissingRange);
}

TEST(RangesJson, RoundTripsExactly) {
  RangeRegistry reg;
  reg.set("ln_in", {-0.1 / 3, 1e300, 17, {ClipStrategy::Average, 3}, 0.25, 2.0 / 3});
  reg.set("ffn", {-2, 2, 5, {ClipStrategy::Median, 5}, 0, 1});
  auto text = ranges_to_json(reg, R"({"seed":1})");
  auto back = parse_ranges(text);
  EXPECT_EQ(back.entries(), reg.entries());
  EXPECT_EQ(ranges_to_json(back, R"({"seed":1})"), text);
  auto doc = nlohmann::json::parse(text);
  EXPECT_EQ(doc["version"], 1);
  EXPECT_EQ(doc["entries"][0]["strategy"], "median");
  EXPECT_EQ(doc["entries"][1]["k"], 3);
  EXPECT_EQ(doc["config"]["seed"], 1);
}

TEST(RangesJson, RejectsMalformed) {
  EXPECT_PTQ_ERROR(parse_ranges("{"), Errc::MalformedManifest);
  EXPECT_PTQ_ERROR(parse_ranges(R"({"version":2,"entries":[]})"), Errc::MalformedManifest);
  EXPECT_PTQ_ERROR(parse_ranges(R"({"version":1,"entries":[{"key":"a","r_l":2,"r_u":1,"sample_count":1,"strategy":"median","k":1}]})"),
                   Errc::InvertedRange);
}

TEST(Sampling, PerTagDrawsFromEveryTag) {
  std::vector<ManifestEntry> entries;
  for (int s = 0; s < 30; ++s) {
    for (const char* tag : {"a", "b", "c"}) {
      char id[32];
      std::snprintf(id, sizeof id, "seq%03d/%s", s, tag);
      entries.push_back({id, "x.npy", "x.npy", tag, static_cast<std::uint64_t>(1 + s * 7 % 50)});
    }
  }
  entries.push_back({"weight000", "w.npy", "w.npy", "weight", 0});
  DumpManifest m(entries);
  auto ids = sample_calibration_per_tag(m, 8, {SamplingKind::Random, 3});
  ASSERT_EQ(ids.size(), 24u);
  std::map<std::string, int> per_tag;
  std::map<std::string, std::set<std::string>> sequences;
  for (const auto& id : ids) {
    const auto& e = m.entry(id);
    ++per_tag[e.tag];
    sequences[e.tag].insert(id.substr(0, id.find('/')));
  }
  EXPECT_EQ(per_tag, (std::map<std::string, int>{{"a", 8}, {"b", 8}, {"c", 8}}));
  // Parallel per-tag populations pick the same sequences.
  EXPECT_EQ(sequences["a"], sequences["b"]);
  EXPECT_EQ(sequences["a"], sequences["c"]);
  EXPECT_PTQ_ERROR(sample_calibration_per_tag(m, 31, {}), Errc::SizeExceedsPopulation);
}
