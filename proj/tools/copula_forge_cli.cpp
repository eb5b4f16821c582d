// copula-forge: fit, sample, evaluate and benchmark generative Archimedean
// copulas from the command line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "copula_forge/copula_ac.hpp"
#include "copula_forge/copula_hac.hpp"
#include "copula_forge/data_io.hpp"
#include "copula_forge/errors.hpp"
#include "copula_forge/kernels.hpp"
#include "copula_forge/model.hpp"
#include "copula_forge/model_io.hpp"
#include "copula_forge/parametric.hpp"
#include "copula_forge/stats.hpp"
#include "copula_forge/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace copula_forge;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kConfigError = 2, kSolverError = 3, kIoError = 4 };

// ---------------------------------------------------------------------------
// Flag parsing helpers

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  for (const auto& item : split(s, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw DomainError(std::string("cannot parse ") + what + " '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw DomainError(std::string("empty ") + what);
  return out;
}

// "family:theta"
std::pair<Family, double> parse_family_theta(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw DomainError("expected family:theta, got '" + s + "'");
  std::size_t used = 0;
  double theta = 0.0;
  const std::string num = s.substr(colon + 1);
  try {
    theta = std::stod(num, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != num.size()) throw DomainError("cannot parse theta in '" + s + "'");
  return {parse_family(s.substr(0, colon)), theta};
}

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("COPULA_FORGE_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        throw DomainError(std::string("COPULA_FORGE_THREADS is not an integer: '") + env + "'");
      }
    }
  }
  if (threads > 0) kernels::set_thread_limit(threads);
}

// ---------------------------------------------------------------------------
// Output helpers

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out.flush()) throw IoError("write to '" + path.string() + "' failed");
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json manifest(const std::string& command, const std::vector<std::string>& argv, const json& config) {
  return json{{"tool", "copula-forge"},
              {"version", kVersion},
              {"command", command},
              {"argv", argv},
              {"config", config},
              {"threads", kernels::thread_limit()},
              {"created", utc_timestamp()}};
}

// Manifest next to a file output, or inside a directory output.
void write_manifest(const fs::path& out, bool is_dir, const json& m) {
  const fs::path where = is_dir ? out / "manifest.json" : fs::path(out.string() + ".manifest.json");
  write_text(where, m.dump(2) + "\n");
}

json report_json(const FitReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"epochs_run", r.loss_trace.size()},
              {"final_loss", r.loss_trace.empty() ? json(nullptr) : num(r.loss_trace.back())},
              {"best_val_nll", num(r.best_val_nll)},
              {"best_epoch", r.best_epoch},
              {"train_nll", num(r.train_nll)},
              {"test_nll", num(r.test_nll)},
              {"clamp_events", r.clamp_events},
              {"solver_failures", r.solver_failures},
              {"wall_seconds", r.wall_seconds},
              {"warnings", r.warnings}};
}

// ---------------------------------------------------------------------------
// Data sources shared by fit and synth

struct SourceFlags {
  std::string data;
  std::string family = "clayton";
  double theta = 5.0;
  int dim = 2;
  std::string truth;      // "outer:theta;child:theta;..." for hierarchical ground truth
  std::string structure;  // "2,2"
  std::size_t n_train = 2000;
  std::size_t n_test = 1000;
};

std::vector<std::vector<int>> parse_structure(const std::string& s) {
  const auto sizes = parse_int_list(s, "structure");
  return consecutive_partition(sizes);
}

SynthSpec synth_spec(const SourceFlags& f) {
  if (f.truth.empty()) return FlatSynth{parse_family(f.family), f.theta, f.dim};
  if (f.structure.empty()) throw DomainError("--truth needs --structure");
  const auto parts = split(f.truth, ';');
  const auto blocks = parse_structure(f.structure);
  if (parts.size() != blocks.size() + 1)
    throw DomainError("--truth needs one outer and one generator per child of --structure");
  HacSynth h;
  std::tie(h.outer_family, h.outer_theta) = parse_family_theta(parts[0]);
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    HacSynthChild c;
    std::tie(c.family, c.theta) = parse_family_theta(parts[j + 1]);
    c.vars = blocks[j];
    h.children.push_back(std::move(c));
  }
  return h;
}

Dataset load_source(const SourceFlags& f, std::uint64_t seed) {
  if (!f.data.empty()) return load_csv_dataset(f.data, seed);
  return synth_dataset(synth_spec(f), f.n_train, f.n_test, seed);
}

void add_source_flags(CLI::App* cmd, SourceFlags& f) {
  cmd->add_option("--data", f.data, "CSV with a header row; rank-normalised and split 3:1");
  cmd->add_option("--family", f.family, "ground-truth family when no --data is given")
      ->capture_default_str();
  cmd->add_option("--theta", f.theta, "ground-truth parameter")->capture_default_str();
  cmd->add_option("--dim", f.dim, "ground-truth dimension")->capture_default_str();
  cmd->add_option("--truth", f.truth, "hierarchical ground truth, e.g. 'clayton:1;clayton:3;clayton:8'");
  cmd->add_option("--structure", f.structure, "child sizes of a hierarchical model, e.g. '2,2'");
  cmd->add_option("--n-train", f.n_train, "synthetic training rows")->capture_default_str();
  cmd->add_option("--n-test", f.n_test, "synthetic test rows")->capture_default_str();
}

// ---------------------------------------------------------------------------
// Commands

struct FitFlags {
  SourceFlags source;
  std::string method = "mle";
  std::string outer = "gen";
  std::optional<int> epochs;
  std::optional<int> batch;
  std::optional<double> lr;
  std::optional<std::size_t> l_train;
  std::optional<std::size_t> l_eval;
  std::uint64_t seed = 0;
  std::string hidden = "10,10";
  int eval_every = 100;
  bool crn = false;
  bool minimax = false;
  bool quiet = false;
  std::string out = "fit_out";
};

TrainConfig make_config(const FitFlags& f, Method m) {
  TrainConfig c = TrainConfig::defaults(m);
  if (f.epochs) c.epochs = *f.epochs;
  if (f.batch) c.batch_size = *f.batch;
  if (f.lr) c.lr = *f.lr;
  if (f.l_train) c.latent_train = *f.l_train;
  if (f.l_eval) c.latent_eval = *f.l_eval;
  c.seed = f.seed;
  c.eval_every = f.eval_every;
  c.common_random_numbers = f.crn;
  c.minimax_generator_loss = f.minimax;
  return c;
}

json config_json(const TrainConfig& c) {
  return json{{"method", to_string(c.method)},     {"epochs", c.epochs},
              {"batch_size", c.batch_size},        {"lr", c.lr},
              {"momentum", c.momentum},            {"adam_betas", {c.adam_beta1, c.adam_beta2}},
              {"L_train", c.latent_train},         {"L_eval", c.latent_eval},
              {"newton_tol", c.newton_tol},        {"seed", c.seed},
              {"common_random_numbers", c.common_random_numbers},
              {"validation_fraction", c.validation_fraction},
              {"minimax_generator_loss", c.minimax_generator_loss}};
}

int cmd_fit(const FitFlags& f, const std::vector<std::string>& argv) {
  const fs::path out(f.out);
  fs::create_directories(out);
  const Dataset ds = load_source(f.source, f.seed);
  const Matrix train = ds.train(), test = ds.test();
  NetArchitecture arch;
  arch.hidden_widths = parse_int_list(f.hidden, "hidden widths");

  std::ofstream epochs_log(out / "epochs.jsonl");
  if (!epochs_log) throw IoError("cannot write " + (out / "epochs.jsonl").string());
  const EpochSink sink = [&](const EpochRecord& r) {
    epochs_log << to_json_line(r) << '\n';
    if (!f.quiet && !std::isnan(r.val_nll))
      std::cerr << "epoch " << r.epoch + 1 << "  loss " << r.loss << "  val nll " << r.val_nll << '\n';
  };

  json summary{{"data", ds.provenance}, {"train_rows", train.rows()}, {"test_rows", test.rows()}};
  json cfg_json;
  if (f.source.structure.empty()) {
    const TrainConfig cfg = make_config(f, parse_method(f.method));
    cfg_json = config_json(cfg);
    FlatFit fit = fit_flat(train, arch, cfg, sink);
    const AcSpec spec{fit.net, static_cast<int>(train.cols()), {cfg.latent_train, cfg.latent_eval}};
    if (test.rows() > 0) fit.report.test_nll = nll(instantiate(spec, cfg.latent_eval, cfg.seed), test);
    save_model((out / "model.json").string(), spec);
    summary["report"] = report_json(fit.report);
    std::cout << "test NLL " << fit.report.test_nll << "  (train " << fit.report.train_nll << ")\n";
  } else {
    const auto structure = parse_structure(f.source.structure);
    const TrainConfig outer_cfg = make_config(f, Method::Cvm);
    const TrainConfig child_cfg = make_config(f, Method::Mle);
    cfg_json = json{{"outer", config_json(outer_cfg)}, {"child", config_json(child_cfg)}, {"outer_kind", f.outer}};
    const HacFit fit = fit_hac(train, structure, parse_outer(f.outer), outer_cfg, child_cfg, arch, sink);
    save_model((out / "model.json").string(), fit.spec);
    json children = json::array();
    for (const auto& r : fit.child_reports) children.push_back(report_json(r));
    summary["outer_report"] = report_json(fit.outer_report);
    summary["child_reports"] = children;
    if (test.rows() > 0) {
      const HacModel model = instantiate(fit.spec, child_cfg.latent_eval, child_cfg.seed);
      summary["test_cvm"] = cvm_statistic(model, test);
      std::cout << "test CvM statistic " << summary["test_cvm"].get<double>() << '\n';
    }
  }
  write_text(out / "report.json", summary.dump(2) + "\n");
  write_manifest(out, true, manifest("fit", argv, json{{"train", cfg_json}, {"hidden", arch.hidden_widths},
                                                       {"source", ds.provenance}}));
  return kOk;
}

// Evaluation model for a stored spec.
struct LoadedModel {
  ModelSpec spec;
  std::optional<AcModel> ac;
  std::optional<HacModel> hac;
  int dim() const { return ac ? ac->dim() : hac->dim(); }
};

LoadedModel load_for_eval(const std::string& path, std::optional<std::size_t> latent, std::uint64_t seed) {
  LoadedModel m{load_model(path), std::nullopt, std::nullopt};
  if (const auto* ac = std::get_if<AcSpec>(&m.spec))
    m.ac.emplace(instantiate(*ac, latent.value_or(ac->latent.eval), seed));
  else {
    const auto& h = std::get<HacSpec>(m.spec);
    m.hac.emplace(instantiate(h, latent.value_or(h.latent.eval), seed));
  }
  return m;
}

Matrix sample_model(const LoadedModel& m, std::size_t n, std::uint64_t seed) {
  return m.ac ? m.ac->sample(n, seed) : m.hac->sample(n, seed);
}

struct SampleFlags {
  std::string model;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::optional<std::size_t> l_eval;
  std::string out = "samples.csv";
};

int cmd_sample(const SampleFlags& f, const std::vector<std::string>& argv) {
  const LoadedModel m = load_for_eval(f.model, f.l_eval, f.seed);
  const Matrix s = sample_model(m, f.n, f.seed);
  write_csv(f.out, s, default_header(s.cols()));
  write_manifest(f.out, false, manifest("sample", argv, json{{"model", f.model}, {"n", f.n}, {"seed", f.seed}}));
  return kOk;
}

struct EvalFlags {
  std::string model;
  std::string data;
  bool rank = false;
  std::size_t n_samples = 10000;
  std::uint64_t seed = 0;
  std::optional<std::size_t> l_eval;
  std::string out;
};

int cmd_eval(const EvalFlags& f, const std::vector<std::string>& argv) {
  const LoadedModel m = load_for_eval(f.model, f.l_eval, f.seed);
  CsvTable t = read_csv(f.data);
  Matrix data = f.rank ? rank_normalize(t.values) : t.values;
  if (static_cast<int>(data.cols()) != m.dim())
    throw DomainError("data has " + std::to_string(data.cols()) + " columns, model expects " +
                      std::to_string(m.dim()));
  for (std::size_t r = 0; r < data.rows(); ++r)
    for (double v : data.row(r))
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("data must lie in [0, 1]; pass --rank for raw data");

  json res{{"rows", data.rows()}};
  if (m.ac) {
    res["nll"] = nll(*m.ac, data);
    res["cvm"] = cvm_statistic(*m.ac, data);
  } else {
    res["cvm"] = cvm_statistic(*m.hac, data);
  }
  const Matrix s = sample_model(m, f.n_samples, f.seed);
  json ks = json::array();
  for (std::size_t c = 0; c < s.cols(); ++c) ks.push_back(ks_uniform(s.column(c)));
  res["sample_ks"] = ks;
  res["ks_critical_1pct"] = ks_critical_value(s.rows(), 0.01);
  const Matrix tau_data = kernels::parallel::kendall_tau_matrix(data);
  const Matrix tau_model = kernels::parallel::kendall_tau_matrix(s);
  json taus = json::array();
  for (std::size_t i = 0; i < data.cols(); ++i)
    for (std::size_t j = i + 1; j < data.cols(); ++j)
      taus.push_back(json{{"pair", {i + 1, j + 1}}, {"data", tau_data(i, j)}, {"model", tau_model(i, j)}});
  res["kendall_tau"] = taus;
  std::cout << res.dump(2) << '\n';
  if (!f.out.empty()) {
    write_text(f.out, res.dump(2) + "\n");
    write_manifest(f.out, false, manifest("eval", argv, json{{"model", f.model}, {"data", f.data}, {"seed", f.seed}}));
  }
  return kOk;
}

struct SynthFlags {
  SourceFlags source;
  std::size_t n = 3000;
  std::uint64_t seed = 0;
  std::string out = "synth.csv";
};

int cmd_synth(const SynthFlags& f, const std::vector<std::string>& argv) {
  const SynthSpec spec = synth_spec(f.source);
  const Matrix s = synth(spec, f.n, f.seed);
  write_csv(f.out, s, default_header(s.cols()));
  write_manifest(f.out, false, manifest("synth", argv, json{{"spec", describe(spec)}, {"n", f.n}, {"seed", f.seed}}));
  return kOk;
}

struct BenchDensityFlags {
  std::string dims = "2,5,10,15,20";
  std::size_t n = 3000;
  int reps = 3;
  std::size_t latent = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

// Generative-form model: empirical transform of Gamma draws (Clayton theta=5).
int cmd_bench_density(const BenchDensityFlags& f, const std::vector<std::string>& argv) {
  if (f.reps < 1) throw DomainError("--reps must be >= 1");
  const auto dims = parse_int_list(f.dims, "dims");
  Rng rng = stream_rng(f.seed, 0xbe);
  std::vector<double> m(f.latent);
  for (auto& v : m) v = sample_gamma(0.2, rng);
  const EmpiricalGenerator eg(m);

  std::ostringstream table;
  table << "dim,n,median_seconds,min_seconds,max_seconds\n";
  std::vector<double> xs, ys;
  for (int d : dims) {
    if (d < 2) throw DomainError("dims must be >= 2");
    const AcModel model(eg, d);
    const Matrix data = synth(FlatSynth{Family::Clayton, 5.0, d}, f.n, f.seed + static_cast<std::uint64_t>(d));
    std::vector<double> times;
    for (int r = 0; r < f.reps; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto ld = kernels::parallel::log_density_rows(model, data);
      const auto t1 = std::chrono::steady_clock::now();
      (void)ld;
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    const double med = median(times);
    table << d << ',' << f.n << ',' << med << ',' << *std::min_element(times.begin(), times.end()) << ','
          << *std::max_element(times.begin(), times.end()) << '\n';
    xs.push_back(d);
    ys.push_back(med);
  }
  std::cout << table.str();
  if (xs.size() >= 2 && f.n > 0) {
    const LinearFit lf = fit_line(xs, ys);
    std::cout << "# linear fit: seconds = " << lf.intercept << " + " << lf.slope << " * d, R^2 = " << lf.r_squared
              << '\n';
  }
  if (!f.out.empty()) {
    write_text(f.out, table.str());
    write_manifest(f.out, false, manifest("bench-density", argv, json{{"dims", dims}, {"n", f.n}, {"reps", f.reps},
                                                                     {"latent", f.latent}, {"seed", f.seed}}));
  }
  return kOk;
}

struct BenchSamplingFlags {
  std::string model;
  std::string family = "clayton";
  double theta = 5.0;
  int dim = 2;
  std::size_t n = 3000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_bench_sampling(const BenchSamplingFlags& f, const std::vector<std::string>& argv) {
  std::optional<LoadedModel> loaded;
  std::optional<AcModel> fallback;
  if (!f.model.empty())
    loaded = load_for_eval(f.model, std::nullopt, f.seed);
  else
    fallback.emplace(ParametricGenerator(parse_family(f.family), f.theta), f.dim);
  const auto t0 = std::chrono::steady_clock::now();
  const Matrix s = loaded ? sample_model(*loaded, f.n, f.seed) : fallback->sample(f.n, f.seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "rows," << s.rows() << "\nseconds," << secs << '\n';
  if (!f.out.empty()) {
    write_csv(f.out, s, default_header(s.cols()));
    write_manifest(f.out, false,
                   manifest("bench-sampling", argv, json{{"model", f.model}, {"n", f.n}, {"seed", f.seed},
                                                         {"seconds", secs}}));
  }
  return kOk;
}

struct LatentHistFlags {
  std::string model;
  std::size_t n = 10000;
  int bins = 50;
  std::string oracle;  // "clayton:5"
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_latent_hist(const LatentHistFlags& f, const std::vector<std::string>& argv) {
  if (f.bins < 1) throw DomainError("--bins must be >= 1");
  const ModelSpec spec = load_model(f.model);
  const auto* ac = std::get_if<AcSpec>(&spec);
  if (!ac || !std::holds_alternative<GeneratorNet>(ac->generator))
    throw DomainError("latent-hist needs a flat generative model");
  const GeneratorNet& net = std::get<GeneratorNet>(ac->generator);
  Rng rng = stream_rng(f.seed, 0x4157);
  std::vector<double> draws = net.sample_batch(f.n, rng).m;
  if (draws.empty()) throw DomainError("--n must be >= 1");

  std::optional<ParametricGenerator> oracle;
  std::vector<double> oracle_draws;
  if (!f.oracle.empty()) {
    const auto [fam, th] = parse_family_theta(f.oracle);
    oracle.emplace(fam, th);
    if (!oracle->has_latent_sampler()) throw UnsupportedError("oracle family has no latent sampler");
    Rng orng = stream_rng(f.seed, 0x0ac1e);
    oracle_draws.resize(f.n);
    for (auto& v : oracle_draws) v = oracle->sample_latent(orng);
  }

  const double lo = *std::min_element(draws.begin(), draws.end());
  const double hi = *std::max_element(draws.begin(), draws.end());
  const int bins = hi > lo ? f.bins : 1;
  const double width = hi > lo ? (hi - lo) / bins : 1.0;
  std::vector<double> counts(bins, 0.0), ocounts(bins, 0.0);
  auto bin_of = [&](double v) { return std::clamp(static_cast<int>((v - lo) / width), 0, bins - 1); };
  for (double v : draws) counts[bin_of(v)] += 1.0;
  for (double v : oracle_draws)
    if (v >= lo && v <= lo + width * bins) ocounts[bin_of(v)] += 1.0;

  std::ostringstream table;
  table << std::setprecision(17);
  table << "bin_lo,bin_hi,learned_density" << (oracle ? ",oracle_density" : "") << '\n';
  const double n = static_cast<double>(draws.size());
  for (int b = 0; b < bins; ++b) {
    table << lo + b * width << ',' << lo + (b + 1) * width << ',' << counts[b] / (n * width);
    if (oracle) table << ',' << ocounts[b] / (static_cast<double>(oracle_draws.size()) * width);
    table << '\n';
  }
  std::cout << table.str();
  if (oracle) {
    std::cout << "# W1 raw " << wasserstein1(draws, oracle_draws);
    // The copula fixes the latent only up to scale; compare at the oracle's mean.
    const double scale = mean(oracle_draws) / mean(draws);
    std::vector<double> scaled(draws);
    for (auto& v : scaled) v *= scale;
    std::cout << "  W1 mean-matched " << wasserstein1(scaled, oracle_draws) << '\n';
  }
  if (!f.out.empty()) {
    write_text(f.out, table.str());
    write_manifest(f.out, false, manifest("latent-hist", argv, json{{"model", f.model}, {"n", f.n}, {"bins", f.bins},
                                                                   {"oracle", f.oracle}, {"seed", f.seed}}));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Generative Archimedean and hierarchical Archimedean copulas"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (default: COPULA_FORGE_THREADS or all cores)");

  FitFlags fit;
  auto* c_fit = app.add_subcommand("fit", "train a flat (or, with --structure, hierarchical) model");
  add_source_flags(c_fit, fit.source);
  c_fit->add_option("--method", fit.method, "mle | cvm | gan")->capture_default_str();
  c_fit->add_option("--outer", fit.outer, "hierarchical outer: gen | family | family:theta")->capture_default_str();
  c_fit->add_option("--epochs", fit.epochs, "optimizer steps (default 10000)");
  c_fit->add_option("--batch", fit.batch, "minibatch rows (default 200)");
  c_fit->add_option("--lr", fit.lr, "learning rate (default per method)");
  c_fit->add_option("--L-train", fit.l_train, "latent draws per training step (default 100)");
  c_fit->add_option("--L-eval", fit.l_eval, "latent draws for evaluation (default 1000)");
  c_fit->add_option("--seed", fit.seed)->capture_default_str();
  c_fit->add_option("--hidden", fit.hidden, "hidden layer widths")->capture_default_str();
  c_fit->add_option("--eval-every", fit.eval_every, "validation period in epochs")->capture_default_str();
  c_fit->add_flag("--crn", fit.crn, "reuse one set of latent noise for every step");
  c_fit->add_flag("--minimax", fit.minimax, "minimax adversarial generator loss");
  c_fit->add_flag("--quiet", fit.quiet, "no progress on stderr");
  c_fit->add_option("--out", fit.out, "output directory")->capture_default_str();

  SampleFlags sample;
  auto* c_sample = app.add_subcommand("sample", "draw from a stored model");
  c_sample->add_option("--model", sample.model)->required();
  c_sample->add_option("--n", sample.n)->capture_default_str();
  c_sample->add_option("--seed", sample.seed)->capture_default_str();
  c_sample->add_option("--L-eval", sample.l_eval, "latent draws behind the transform");
  c_sample->add_option("--out", sample.out)->capture_default_str();

  EvalFlags eval;
  auto* c_eval = app.add_subcommand("eval", "NLL, CvM statistic, margin KS and Kendall taus");
  c_eval->add_option("--model", eval.model)->required();
  c_eval->add_option("--data", eval.data)->required();
  c_eval->add_flag("--rank", eval.rank, "rank-normalise the data first");
  c_eval->add_option("--n-samples", eval.n_samples, "model draws for KS and taus")->capture_default_str();
  c_eval->add_option("--seed", eval.seed)->capture_default_str();
  c_eval->add_option("--L-eval", eval.l_eval);
  c_eval->add_option("--out", eval.out, "also write the JSON result here");

  SynthFlags syn;
  auto* c_synth = app.add_subcommand("synth", "ground-truth data from parametric generators");
  add_source_flags(c_synth, syn.source);
  c_synth->add_option("--n", syn.n)->capture_default_str();
  c_synth->add_option("--seed", syn.seed)->capture_default_str();
  c_synth->add_option("--out", syn.out)->capture_default_str();

  BenchDensityFlags bd;
  auto* c_bd = app.add_subcommand("bench-density", "log-density wall time against dimension");
  c_bd->add_option("--dims", bd.dims)->capture_default_str();
  c_bd->add_option("--n", bd.n)->capture_default_str();
  c_bd->add_option("--reps", bd.reps)->capture_default_str();
  c_bd->add_option("--L-eval", bd.latent)->capture_default_str();
  c_bd->add_option("--seed", bd.seed)->capture_default_str();
  c_bd->add_option("--out", bd.out);

  BenchSamplingFlags bs;
  auto* c_bs = app.add_subcommand("bench-sampling", "sampling wall time");
  c_bs->add_option("--model", bs.model, "stored model (default: parametric --family/--theta/--dim)");
  c_bs->add_option("--family", bs.family)->capture_default_str();
  c_bs->add_option("--theta", bs.theta)->capture_default_str();
  c_bs->add_option("--dim", bs.dim)->capture_default_str();
  c_bs->add_option("--n", bs.n)->capture_default_str();
  c_bs->add_option("--seed", bs.seed)->capture_default_str();
  c_bs->add_option("--out", bs.out);

  LatentHistFlags lh;
  auto* c_lh = app.add_subcommand("latent-hist", "histogram of the learned latent");
  c_lh->add_option("--model", lh.model)->required();
  c_lh->add_option("--n", lh.n)->capture_default_str();
  c_lh->add_option("--bins", lh.bins)->capture_default_str();
  c_lh->add_option("--oracle", lh.oracle, "family:theta whose latent to compare against");
  c_lh->add_option("--seed", lh.seed)->capture_default_str();
  c_lh->add_option("--out", lh.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    apply_threads(threads);
    if (*c_fit) return cmd_fit(fit, args);
    if (*c_sample) return cmd_sample(sample, args);
    if (*c_eval) return cmd_eval(eval, args);
    if (*c_synth) return cmd_synth(syn, args);
    if (*c_bd) return cmd_bench_density(bd, args);
    if (*c_bs) return cmd_bench_sampling(bs, args);
    if (*c_lh) return cmd_latent_hist(lh, args);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
