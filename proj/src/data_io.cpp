#include "copula_forge/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "copula_forge/copula_ac.hpp"
#include "copula_forge/detail/parallel.hpp"
#include "copula_forge/errors.hpp"
#include "copula_forge/rng.hpp"

namespace copula_forge {

Matrix rank_normalize(const Matrix& raw) {
  const std::size_t n = raw.rows(), d = raw.cols();
  if (n < 2) throw DomainError("rank_normalize: need at least two rows");
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (!std::isfinite(raw(r, c)))
        throw DomainError("rank_normalize: non-finite value at row " + std::to_string(r + 1) + ", column " +
                          std::to_string(c + 1));
  Matrix out(n, d);
  std::vector<std::size_t> order(n);
  const double denom = static_cast<double>(n + 1);
  for (std::size_t c = 0; c < d; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw(a, c) < raw(b, c); });
    for (std::size_t rank = 0; rank < n; ++rank) out(order[rank], c) = static_cast<double>(rank + 1) / denom;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& name) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  auto where = [&](std::size_t col) {
    return name + ": line " + std::to_string(line_no) + ", column " + std::to_string(col + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw IoError(name + ": missing header row");
  t.header = split_fields(line);
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c].empty()) throw IoError(where(c) + ": empty column name");
    double probe = 0.0;
    std::size_t used = 0;
    try {
      probe = std::stod(t.header[c], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    (void)probe;
    if (used == t.header[c].size()) throw IoError(name + ": first row looks numeric; a header row is required");
  }
  const std::size_t d = t.header.size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != d)
      throw IoError(name + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                    " fields, expected " + std::to_string(d));
    for (std::size_t c = 0; c < d; ++c) {
      if (fields[c].empty()) throw IoError(where(c) + ": missing value");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[c].size() || used == 0) throw IoError(where(c) + ": not a number: '" + fields[c] + "'");
      if (!std::isfinite(v)) throw IoError(where(c) + ": non-finite value");
      values.push_back(v);
    }
    ++rows;
  }
  if (in.bad()) throw IoError(name + ": read error");
  t.values = Matrix(rows, d);
  std::copy(values.begin(), values.end(), t.values.data().begin());
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_csv(in, path);
}

void write_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& header) {
  if (header.size() != values.cols()) throw ContractError("write_csv: header width does not match the data");
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < values.rows(); ++r) {
    for (std::size_t c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", values(r, c));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, values, header);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<std::string> default_header(std::size_t dim) {
  std::vector<std::string> h(dim);
  for (std::size_t i = 0; i < dim; ++i) h[i] = "u" + std::to_string(i + 1);
  return h;
}

Dataset load_csv_dataset(const std::string& path, std::uint64_t seed) {
  CsvTable t = read_csv(path);
  if (t.values.rows() < 4) throw DomainError(path + ": need at least four rows for a 3:1 split");
  Dataset ds;
  ds.data = rank_normalize(t.values);
  ds.columns = std::move(t.header);
  ds.provenance = "csv(" + path + ")";
  std::vector<std::size_t> idx(ds.data.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = stream_rng(seed, 0x0c5f);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n_train = (idx.size() * 3) / 4;
  ds.train_rows.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  ds.test_rows.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(ds.train_rows.begin(), ds.train_rows.end());
  std::sort(ds.test_rows.begin(), ds.test_rows.end());
  return ds;
}

// ---------------------------------------------------------------------------
// Ground-truth draws

int HacSynth::dim() const {
  int d = 0;
  for (const auto& c : children) d += static_cast<int>(c.vars.size());
  return d;
}

std::string describe(const SynthSpec& spec) {
  std::ostringstream os;
  if (const auto* f = std::get_if<FlatSynth>(&spec)) {
    os << "flat(" << to_string(f->family) << ", theta=" << f->theta << ", d=" << f->dim << ")";
  } else {
    const auto& h = std::get<HacSynth>(spec);
    os << "hac(" << to_string(h.outer_family) << ":" << h.outer_theta;
    for (const auto& c : h.children) {
      os << "; " << to_string(c.family) << ":" << c.theta << " [";
      for (std::size_t i = 0; i < c.vars.size(); ++i) os << (i ? "," : "") << c.vars[i];
      os << "]";
    }
    os << ")";
  }
  return os.str();
}

namespace {

void validate_hac(const HacSynth& h) {
  if (h.children.size() < 2) throw DomainError("synth: a hierarchical spec needs at least two children");
  std::vector<int> seen(static_cast<std::size_t>(h.dim()), 0);
  for (const auto& c : h.children) {
    if (c.vars.empty()) throw DomainError("synth: empty child");
    for (int v : c.vars) {
      if (v < 0 || v >= h.dim() || seen[v]++) throw DomainError("synth: child variables must partition 0..d-1");
    }
  }
}

// Generator pieces in terms of log s, so that sums of generator inverses can
// be formed without overflow (Nelsen 19's inverse is exp(theta / u) - e^theta).
double log_phi_inv(const ParametricGenerator& g, double u) {
  if (g.family() == Family::Nelsen19) {
    const double th = g.theta();
    return th / u + std::log(-std::expm1(th - th / u));
  }
  return std::log(g.phi_inv(u));
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double phi_at_log(const ParametricGenerator& g, double ls) {
  if (g.family() == Family::Nelsen19) return g.theta() / log_add(ls, g.theta());
  return g.phi(std::exp(ls));
}

double log_abs_d1_at_log(const ParametricGenerator& g, double ls) {
  if (g.family() == Family::Nelsen19) {
    // phi'(s) = -theta / ((s + e^theta) log^2(s + e^theta))
    const double big = log_add(ls, g.theta());
    return std::log(g.theta()) - big - 2.0 * std::log(big);
  }
  return g.log_abs_deriv(1, std::exp(ls));
}

// Child block given the outer latent v by sequential conditional inversion;
// psi = phi_0^{-1} o phi_j links the two generators.
void conditional_block(const ParametricGenerator& outer, const ParametricGenerator& child, double v,
                       std::span<double> out, Rng& rng) {
  auto psi = [&](double ls) { return outer.phi_inv(phi_at_log(child, ls)); };
  auto log_psi_slope = [&](double ls) {
    return log_abs_d1_at_log(child, ls) - outer.log_abs_deriv(1, psi(ls));
  };
  out[0] = std::max(outer.phi(unit_exponential(rng) / v), std::numeric_limits<double>::min());
  if (out.size() == 1) return;
  const double ls1 = log_phi_inv(child, out[0]);
  const double psi1 = psi(ls1);
  const double slope1 = log_psi_slope(ls1);
  const double log_w = std::log(uniform_open(rng));
  // log F(u2 | u1) is increasing in u2, from -inf at 0 to 0 at 1.
  auto log_f = [&](double u2) {
    const double ls = log_add(ls1, log_phi_inv(child, u2));
    return -v * (psi(ls) - psi1) + log_psi_slope(ls) - slope1;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = log_f(mid);
    if (!(f < log_w)) hi = mid; else lo = mid;
  }
  out[1] = 0.5 * (lo + hi);
}

Matrix synth_hac(const HacSynth& h, std::size_t n, std::uint64_t seed) {
  validate_hac(h);
  const ParametricGenerator outer(h.outer_family, h.outer_theta);
  if (!outer.has_latent_sampler())
    throw UnsupportedError("synth: outer family " + to_string(h.outer_family) + " has no latent sampler");
  std::vector<ParametricGenerator> gens;
  bool all_clayton = h.outer_family == Family::Clayton;
  for (const auto& c : h.children) {
    gens.emplace_back(c.family, c.theta);
    all_clayton = all_clayton && c.family == Family::Clayton;
  }
  if (all_clayton) {
    for (const auto& c : h.children)
      if (c.theta < h.outer_theta)
        throw DomainError("synth: nested Clayton needs child theta >= outer theta");
  } else {
    for (const auto& c : h.children)
      if (c.vars.size() > 2)
        throw UnsupportedError("synth: children of more than two variables need all-Clayton nesting");
  }
  const int d = h.dim();
  Matrix out(n, static_cast<std::size_t>(d));
  detail::parallel_for(n, [&](std::size_t r) {
    Rng rng = stream_rng(seed, r);
    const double v0 = outer.sample_latent(rng);
    std::vector<double> block;
    for (std::size_t j = 0; j < h.children.size(); ++j) {
      const auto& c = h.children[j];
      block.assign(c.vars.size(), 0.0);
      if (all_clayton) {
        const double alpha = h.outer_theta / c.theta;
        const double lambda = alpha == 1.0 ? v0 : sample_tilted_stable(alpha, v0, rng);
        for (auto& b : block) b = outer.phi(std::pow(1.0 + unit_exponential(rng) / lambda, alpha) - 1.0);
      } else {
        conditional_block(outer, gens[j], v0, block, rng);
      }
      for (std::size_t i = 0; i < c.vars.size(); ++i) out(r, c.vars[i]) = block[i];
    }
  });
  return out;
}

}  // namespace

Matrix synth(const SynthSpec& spec, std::size_t n, std::uint64_t seed) {
  Matrix out;
  if (const auto* f = std::get_if<FlatSynth>(&spec)) {
    const ParametricGenerator gen(f->family, f->theta);
    if (!gen.has_latent_sampler())
      throw UnsupportedError("synth: family " + to_string(f->family) + " has no latent sampler");
    if (f->dim < 2) throw DomainError("synth: dimension must be >= 2");
    out = AcModel(gen, f->dim).sample(n, seed);
  } else {
    out = synth_hac(std::get<HacSynth>(spec), n, seed);
  }
  for (std::size_t r = 0; r < out.rows(); ++r) clip_to_interior(out.row(r));
  return out;
}

Dataset synth_dataset(const SynthSpec& spec, std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  Dataset ds;
  ds.data = synth(spec, n_train + n_test, seed);
  ds.columns = default_header(ds.data.cols());
  ds.provenance = "synthetic(" + describe(spec) + ", seed=" + std::to_string(seed) + ")";
  ds.train_rows.resize(n_train);
  std::iota(ds.train_rows.begin(), ds.train_rows.end(), std::size_t{0});
  ds.test_rows.resize(n_test);
  std::iota(ds.test_rows.begin(), ds.test_rows.end(), n_train);
  return ds;
}

}  // namespace copula_forge
