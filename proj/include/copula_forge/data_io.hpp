#ifndef COPULA_FORGE_DATA_IO_HPP
#define COPULA_FORGE_DATA_IO_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "copula_forge/matrix.hpp"
#include "copula_forge/parametric.hpp"

namespace copula_forge {

/// Observations in (0, 1)^d with a train/test split.
struct Dataset {
  Matrix data;
  std::vector<std::string> columns;
  std::string provenance;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;

  Matrix train() const { return data.select_rows(train_rows); }
  Matrix test() const { return data.select_rows(test_rows); }
};

/// Entry (i, j) becomes rank(raw(i, j)) / (N + 1) within column j, ranks
/// starting at 1; equal values are ranked by row index. Throws DomainError
/// for N < 2 or a non-finite entry (with its location).
Matrix rank_normalize(const Matrix& raw);

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

/// Header row required; every other row must hold one finite number per
/// column. Throws IoError naming the offending line and column.
CsvTable read_csv(const std::string& path);
CsvTable read_csv(std::istream& in, const std::string& name = "<stream>");
void write_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& header);
void write_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& header);
/// "u1", ..., "ud".
std::vector<std::string> default_header(std::size_t dim);

/// Rank-normalised CSV data with a seeded 3:1 train/test split.
Dataset load_csv_dataset(const std::string& path, std::uint64_t seed);

struct FlatSynth {
  Family family = Family::Clayton;
  double theta = 1.0;
  int dim = 2;
};

struct HacSynthChild {
  Family family = Family::Clayton;
  double theta = 1.0;
  std::vector<int> vars;
};

struct HacSynth {
  Family outer_family = Family::Clayton;
  double outer_theta = 1.0;
  std::vector<HacSynthChild> children;

  int dim() const;
};

using SynthSpec = std::variant<FlatSynth, HacSynth>;

/// Ground-truth draws, reproducible by seed.
///  - flat: Marshall-Olkin with the family's exact latent sampler;
///  - hierarchical, all Clayton: outer Gamma latent V_0, child latents
///    exponentially tilted stable with Laplace exponent (1 + x)^(theta_0/theta_j) - 1;
///  - hierarchical, other children: conditional inversion given V_0 for
///    children of at most two variables.
/// Throws UnsupportedError for anything else.
Matrix synth(const SynthSpec& spec, std::size_t n, std::uint64_t seed);

/// `n_train + n_test` draws; the first n_train rows are the training split.
Dataset synth_dataset(const SynthSpec& spec, std::size_t n_train, std::size_t n_test, std::uint64_t seed);

std::string describe(const SynthSpec& spec);

}  // namespace copula_forge

#endif  // COPULA_FORGE_DATA_IO_HPP
