#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "copula_forge/data_io.hpp"
#include "copula_forge/errors.hpp"
#include "copula_forge/kernels.hpp"
#include "copula_forge/parametric.hpp"

using namespace copula_forge;

namespace {

Matrix column(std::vector<double> v) {
  Matrix m(v.size(), 1);
  m.data() = std::move(v);
  return m;
}

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    read_csv(in, "t.csv");
  } catch (const IoError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(DataIo, RankNormalizeExamples) {
  EXPECT_EQ(rank_normalize(column({3.2, 1.1, 7.7})).data(), (std::vector<double>{0.5, 0.25, 0.75}));
  EXPECT_EQ(rank_normalize(column({1, 2, 3, 4})).data(), (std::vector<double>{0.2, 0.4, 0.6, 0.8}));
  const Matrix tied = rank_normalize(column({5, 5}));
  EXPECT_DOUBLE_EQ(tied(0, 0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(tied(1, 0), 2.0 / 3.0);
  EXPECT_THROW(rank_normalize(column({1.0})), DomainError);
}

TEST(DataIo, RankNormalizeNamesNonFiniteLocation) {
  Matrix raw(3, 2, 1.0);
  raw(2, 1) = std::nan("");
  try {
    rank_normalize(raw);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
  }
}

TEST(DataIo, RankNormalizeIsInvariantToMonotoneTransforms) {
  Rng rng = stream_rng(1, 1);
  Matrix raw(500, 3);
  for (auto& v : raw.data()) v = 10.0 * (uniform_open(rng) - 0.5);
  Matrix mapped = raw;
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    mapped(r, 0) = std::exp(raw(r, 0));
    mapped(r, 1) = raw(r, 1) * raw(r, 1) * raw(r, 1) + 2.0;
    mapped(r, 2) = std::atan(raw(r, 2));
  }
  const Matrix a = rank_normalize(raw);
  EXPECT_EQ(a, rank_normalize(mapped));
  // Every column is a permutation of 1/(N+1), ..., N/(N+1).
  for (std::size_t c = 0; c < 3; ++c) {
    auto col = a.column(c);
    std::sort(col.begin(), col.end());
    for (std::size_t i = 0; i < col.size(); ++i) EXPECT_DOUBLE_EQ(col[i], (i + 1) / 501.0);
  }
}

TEST(DataIo, CsvRoundTrip) {
  Matrix m(3, 2);
  m.data() = {0.1, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1e-9, 0.999999};
  std::stringstream ss;
  write_csv(ss, m, {"x", "y"});
  const CsvTable t = read_csv(ss);
  EXPECT_EQ(t.header, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(t.values, m);
  EXPECT_EQ(default_header(3), (std::vector<std::string>{"u1", "u2", "u3"}));
}

TEST(DataIo, CsvErrorsCarryLocation) {
  EXPECT_NE(error_of("a,b\n1,2\n3\n").find("line 3"), std::string::npos);
  const std::string missing = error_of("a,b\n1,\n");
  EXPECT_NE(missing.find("line 2"), std::string::npos) << missing;
  EXPECT_NE(missing.find("missing"), std::string::npos) << missing;
  const std::string bad = error_of("a,b\n1,2\n4,x\n");
  EXPECT_NE(bad.find("line 3"), std::string::npos) << bad;
  EXPECT_NE(bad.find("b"), std::string::npos) << bad;
  EXPECT_NE(error_of("1,2\n3,4\n").find("header"), std::string::npos);
  EXPECT_NE(error_of("").find("header"), std::string::npos);
  EXPECT_THROW(read_csv("/nonexistent/dir/file.csv"), IoError);
}

TEST(DataIo, CsvDatasetSplitsThreeToOne) {
  const auto path = std::filesystem::temp_directory_path() / "copula_forge_test_data.csv";
  Rng rng = stream_rng(2, 2);
  Matrix raw(100, 2);
  for (auto& v : raw.data()) v = 50.0 * uniform_open(rng);
  write_csv(path.string(), raw, {"p", "q"});
  const Dataset ds = load_csv_dataset(path.string(), 7);
  std::filesystem::remove(path);
  EXPECT_EQ(ds.train_rows.size(), 75u);
  EXPECT_EQ(ds.test_rows.size(), 25u);
  EXPECT_EQ(ds.columns, (std::vector<std::string>{"p", "q"}));
  EXPECT_EQ(ds.data, rank_normalize(raw));
  for (double v : ds.data.data()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

// tau = 4 E[C(U, V)] - 1 by Monte Carlo over the true copula.
TEST(DataIo, FlatSynthKendallTau) {
  const Matrix s = synth(FlatSynth{Family::Clayton, 5.0, 2}, 3000, 1);
  const AcModel truth(ParametricGenerator(Family::Clayton, 5.0), 2);
  const Matrix oracle_draws = truth.sample(200000, 99);
  double acc = 0.0;
  for (std::size_t r = 0; r < oracle_draws.rows(); ++r) acc += truth.cdf(oracle_draws.row(r));
  const double oracle = 4.0 * acc / oracle_draws.rows() - 1.0;
  EXPECT_NEAR(kernels::parallel::kendall_tau(s.column(0), s.column(1)), oracle, 0.02);
}

TEST(DataIo, NestedSynthOrdering) {
  const HacSynth spec{Family::Clayton, 1.0, {{Family::Clayton, 3.0, {0, 1}}, {Family::Clayton, 8.0, {2, 3}}}};
  EXPECT_EQ(spec.dim(), 4);
  const Matrix s = synth(spec, 3000, 2);
  const Matrix tau = kernels::parallel::kendall_tau_matrix(s);
  EXPECT_GT(tau(0, 1), tau(0, 2));
  EXPECT_GT(tau(0, 2), 0.0);
  EXPECT_GT(tau(2, 3), tau(0, 1));
  // Nested Clayton: inner taus are the child families' own, cross taus the outer's.
  EXPECT_NEAR(tau(0, 1), 0.6, 0.03);
  EXPECT_NEAR(tau(2, 3), 0.8, 0.03);
  EXPECT_NEAR(tau(1, 3), 1.0 / 3.0, 0.03);
}

TEST(DataIo, HeterogeneousSynth) {
  const HacSynth spec{Family::Clayton, 0.5, {{Family::Nelsen12, 3.0, {0, 1}}, {Family::Nelsen19, 1.0, {2, 3}}}};
  const Matrix s = synth(spec, 3000, 3);
  for (std::size_t c = 0; c < 4; ++c) {
    auto col = s.column(c);
    double m = 0.0;
    for (double v : col) m += v;
    EXPECT_NEAR(m / col.size(), 0.5, 0.02);
  }
  const Matrix tau = kernels::parallel::kendall_tau_matrix(s);
  EXPECT_NEAR(tau(0, 2), 0.2, 0.04);  // outer Clayton(0.5)
  EXPECT_NEAR(tau(0, 1), ParametricGenerator(Family::Nelsen12, 3.0).kendall_tau(), 0.04);
  EXPECT_NEAR(tau(2, 3), ParametricGenerator(Family::Nelsen19, 1.0).kendall_tau(), 0.04);
}

TEST(DataIo, SynthReproducibleAndInterior) {
  const FlatSynth spec{Family::Joe, 3.0, 4};
  const Matrix a = synth(spec, 500, 5);
  EXPECT_EQ(a, synth(spec, 500, 5));
  EXPECT_NE(a, synth(spec, 500, 6));
  for (double v : a.data()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  const Dataset ds = synth_dataset(spec, 200, 100, 5);
  EXPECT_EQ(ds.train().rows(), 200u);
  EXPECT_EQ(ds.test().rows(), 100u);
  EXPECT_EQ(ds.train_rows.front(), 0u);
  EXPECT_EQ(ds.test_rows.front(), 200u);
}

TEST(DataIo, UnsupportedSynth) {
  EXPECT_THROW(synth(FlatSynth{Family::Nelsen12, 2.0, 2}, 10, 1), UnsupportedError);
  const HacSynth wide{Family::Frank, 2.0, {{Family::Frank, 5.0, {0, 1, 2}}, {Family::Frank, 5.0, {3}}}};
  EXPECT_THROW(synth(wide, 10, 1), UnsupportedError);
}
