#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mrfbench/dataset.hpp"
#include "mrfbench/eval.hpp"
#include "mrfbench/graph.hpp"
#include "mrfbench/model.hpp"
#include "mrfbench/pairwise.hpp"
#include "mrfbench/plm.hpp"
#include "mrfbench/sampler.hpp"
#include "mrfbench/scores.hpp"

namespace mrfbench {

inline constexpr int kConfigSchemaVersion = 1;

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> names{"mi", "clr", "aracne", "nd", "plml1", "plmdca"};
  return names;
}

inline bool is_pairwise_postprocessing(const std::string& m) { return m == "clr" || m == "aracne" || m == "nd"; }

enum class NetworkType { grid, scale_free, small_world };

inline std::string to_string(NetworkType t) {
  switch (t) {
    case NetworkType::grid: return "grid";
    case NetworkType::scale_free: return "scale_free";
    case NetworkType::small_world: return "small_world";
  }
  return "?";
}

inline NetworkType parse_network_type(const std::string& s) {
  if (s == "grid") return NetworkType::grid;
  if (s == "scale_free") return NetworkType::scale_free;
  if (s == "small_world") return NetworkType::small_world;
  throw std::invalid_argument("unknown network type '" + s + "'");
}

struct GeneratorSettings {
  int m0 = 3;
  int m = 2;
  Attachment attachment = Attachment::degree_proportional;
  int k = 4;
  double p = 0.25;
};

struct MethodSettings {
  int grid_size = 100;
  double nd_beta = 0.95;
  double aracne_tolerance = 0.0;
  std::optional<double> plm_lambda_bias;
  std::optional<double> plm_lambda_couple;
  EdgeRule l1_rule = EdgeRule::either;
  bool plmdca_apc = true;
};

struct ExperimentConfig {
  NetworkType network = NetworkType::grid;
  int d = 40;
  std::size_t n = 200;
  int replicates = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> methods = known_methods();
  GibbsSettings sampler{};
  MethodSettings method{};
  GeneratorSettings generator{};
  std::string output_dir = "results";
  unsigned threads = 1;
  bool inner_parallel = false;   // parallelize inside a replicate instead of across replicates
  bool persist_artifacts = true;
};

inline void validate(const ExperimentConfig& c) {
  if (c.replicates < 1) throw std::invalid_argument("config: replicates must be >= 1");
  if (c.d < 2) throw std::invalid_argument("config: d must be >= 2");
  if (c.n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (c.methods.empty()) throw std::invalid_argument("config: no methods requested");
  for (const auto& m : c.methods)
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
      throw std::invalid_argument("config: unknown method '" + m + "'");
  if (c.sampler.thinning < 1) throw std::invalid_argument("config: thinning must be >= 1");
  if (c.method.grid_size < 1) throw std::invalid_argument("config: grid_size must be >= 1");
  if (!(c.method.nd_beta > 0 && c.method.nd_beta < 1)) throw std::invalid_argument("config: nd_beta must lie in (0, 1)");
  if (c.method.aracne_tolerance < 0) throw std::invalid_argument("config: aracne_tolerance must be >= 0");
  if (c.network == NetworkType::scale_free && (c.d <= c.generator.m0 || c.generator.m < 1 || c.generator.m > c.generator.m0))
    throw std::invalid_argument("config: scale-free needs d > m0 >= m >= 1");
  if (c.network == NetworkType::small_world && (c.generator.k % 2 != 0 || c.generator.k >= c.d || c.generator.k < 2))
    throw std::invalid_argument("config: small-world needs even k with 2 <= k < d");
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["network_type"] = to_string(c.network);
  j["d"] = c.d;
  j["n"] = c.n;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["methods"] = c.methods;
  j["sampler"] = {{"burn_in", c.sampler.burn_in}, {"thinning", c.sampler.thinning}};
  j["method_settings"] = {{"grid_size", c.method.grid_size},
                          {"nd_beta", c.method.nd_beta},
                          {"aracne_tolerance", c.method.aracne_tolerance},
                          {"plm_lambda_bias", c.method.plm_lambda_bias ? nlohmann::json(*c.method.plm_lambda_bias) : nlohmann::json()},
                          {"plm_lambda_couple", c.method.plm_lambda_couple ? nlohmann::json(*c.method.plm_lambda_couple) : nlohmann::json()},
                          {"l1_rule", c.method.l1_rule == EdgeRule::either ? "or" : "and"},
                          {"plmdca_apc", c.method.plmdca_apc}};
  j["generator"] = {{"m0", c.generator.m0},
                    {"m", c.generator.m},
                    {"attachment", c.generator.attachment == Attachment::uniform ? "uniform" : "degree"},
                    {"k", c.generator.k},
                    {"p", c.generator.p}};
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  j["inner_parallel"] = c.inner_parallel;
  j["persist_artifacts"] = c.persist_artifacts;
  return j;
}

/// Missing keys keep their defaults.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  const int version = j.value("schema_version", kConfigSchemaVersion);
  if (version != kConfigSchemaVersion)
    throw std::invalid_argument("config: unsupported schema_version " + std::to_string(version));
  if (j.contains("network_type")) c.network = parse_network_type(j["network_type"].get<std::string>());
  c.d = j.value("d", c.d);
  c.n = j.value("n", c.n);
  c.replicates = j.value("replicates", c.replicates);
  c.seed = j.value("seed", c.seed);
  if (j.contains("methods")) c.methods = j["methods"].get<std::vector<std::string>>();
  if (j.contains("sampler")) {
    const auto& s = j["sampler"];
    c.sampler.burn_in = s.value("burn_in", c.sampler.burn_in);
    c.sampler.thinning = s.value("thinning", c.sampler.thinning);
  }
  if (j.contains("method_settings")) {
    const auto& m = j["method_settings"];
    c.method.grid_size = m.value("grid_size", c.method.grid_size);
    c.method.nd_beta = m.value("nd_beta", c.method.nd_beta);
    c.method.aracne_tolerance = m.value("aracne_tolerance", c.method.aracne_tolerance);
    if (m.contains("plm_lambda_bias") && !m["plm_lambda_bias"].is_null()) c.method.plm_lambda_bias = m["plm_lambda_bias"].get<double>();
    if (m.contains("plm_lambda_couple") && !m["plm_lambda_couple"].is_null()) c.method.plm_lambda_couple = m["plm_lambda_couple"].get<double>();
    if (m.contains("l1_rule")) {
      const auto rule = m["l1_rule"].get<std::string>();
      if (rule != "or" && rule != "and") throw std::invalid_argument("config: l1_rule must be 'or' or 'and'");
      c.method.l1_rule = rule == "or" ? EdgeRule::either : EdgeRule::both;
    }
    c.method.plmdca_apc = m.value("plmdca_apc", c.method.plmdca_apc);
  }
  if (j.contains("generator")) {
    const auto& g = j["generator"];
    c.generator.m0 = g.value("m0", c.generator.m0);
    c.generator.m = g.value("m", c.generator.m);
    if (g.contains("attachment")) {
      const auto a = g["attachment"].get<std::string>();
      if (a != "degree" && a != "uniform") throw std::invalid_argument("config: attachment must be 'degree' or 'uniform'");
      c.generator.attachment = a == "uniform" ? Attachment::uniform : Attachment::degree_proportional;
    }
    c.generator.k = g.value("k", c.generator.k);
    c.generator.p = g.value("p", c.generator.p);
  }
  c.output_dir = j.value("output_dir", c.output_dir);
  c.threads = j.value("threads", c.threads);
  c.inner_parallel = j.value("inner_parallel", c.inner_parallel);
  c.persist_artifacts = j.value("persist_artifacts", c.persist_artifacts);
  return c;
}

struct ResultRow {
  std::string method;
  std::string network;
  int d = 0;
  std::size_t n = 0;
  int replicate = 0;
  double auc = std::numeric_limits<double>::quiet_NaN();
  double rc090 = std::numeric_limits<double>::quiet_NaN();
  double runtime_seconds = 0.0;     // method itself; post-processing only for clr/aracne/nd
  double mi_runtime_seconds = 0.0;  // shared MI step, filled for clr/aracne/nd
  std::string status = "ok";
};

using ResultsTable = std::vector<ResultRow>;

inline Graph generate_network(const ExperimentConfig& c, Engine& rng) {
  switch (c.network) {
    case NetworkType::grid: {
      const auto [rows, cols] = grid_shape(c.d);
      return generate_grid(rows, cols);
    }
    case NetworkType::scale_free:
      return generate_scale_free(c.d, c.generator.m0, c.generator.m, rng, c.generator.attachment);
    case NetworkType::small_world:
      return generate_small_world(c.d, c.generator.k, c.generator.p, rng);
  }
  throw std::logic_error("unhandled network type");
}

/// Ground-truth model and dataset for one replicate; streams keyed by (seed, replicate).
struct ReplicateData {
  IsingModel model;
  Dataset data;
};

inline ReplicateData simulate_replicate(const ExperimentConfig& c, int replicate, unsigned sampler_threads = 1) {
  Engine graph_rng = make_engine(c.seed, replicate, 0);
  Engine param_rng = make_engine(c.seed, replicate, 1);
  const Graph g = generate_network(c, graph_rng);
  IsingModel model = draw_parameters(g, param_rng);
  GibbsSettings gs = c.sampler;
  gs.threads = sampler_threads;
  Dataset data = gibbs_sample(build_srbm(model), c.n, gs, derive_key(derive_key(c.seed, static_cast<std::uint64_t>(replicate)), 2));
  return {std::move(model), std::move(data)};
}

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename T>
void write_file(const std::filesystem::path& p, T&& writer) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  writer(os);
}
}  // namespace detail

inline std::filesystem::path replicate_dir(const ExperimentConfig& c, int replicate) {
  return std::filesystem::path(c.output_dir) / ("rep_" + std::to_string(replicate));
}

/// Runs every requested method on one replicate. Method failures are recorded
/// per row; a failure to simulate marks the whole replicate failed.
inline ResultsTable run_replicate(const ExperimentConfig& c, int replicate, unsigned inner_threads = 1) {
  ResultsTable rows;
  auto base_row = [&](const std::string& m) {
    ResultRow r;
    r.method = m;
    r.network = to_string(c.network);
    r.d = c.d;
    r.n = c.n;
    r.replicate = replicate;
    return r;
  };

  const auto dir = replicate_dir(c, replicate);
  ReplicateData rep;
  try {
    rep = simulate_replicate(c, replicate, inner_threads);
    if (c.persist_artifacts) {
      std::filesystem::create_directories(dir);
      detail::write_file(dir / "graph.txt", [&](std::ostream& os) { write_graph(os, rep.model.graph); });
      detail::write_file(dir / "model.json", [&](std::ostream& os) {
        os << std::setprecision(17) << model_to_json(rep.model).dump(1) << '\n';
      });
      detail::write_file(dir / "data.csv", [&](std::ostream& os) { write_dataset_csv(os, rep.data); });
    }
  } catch (const std::exception& e) {
    for (const auto& m : c.methods) {
      auto r = base_row(m);
      r.status = std::string("failed: ") + e.what();
      rows.push_back(r);
    }
    return rows;
  }

  const Graph& truth = rep.model.graph;
  const bool needs_mi = std::any_of(c.methods.begin(), c.methods.end(),
                                    [](const std::string& m) { return m == "mi" || is_pairwise_postprocessing(m); });
  std::optional<ScoreMatrix> mi;
  double mi_seconds = 0.0;
  std::string mi_error;
  if (needs_mi) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      mi = mutual_information_matrix(rep.data);
    } catch (const std::exception& e) {
      mi_error = e.what();
    }
    mi_seconds = detail::seconds_since(t0);
  }

  for (const auto& m : c.methods) {
    auto row = base_row(m);
    try {
      ScoreMatrix scores;
      const auto t0 = std::chrono::steady_clock::now();
      if (m == "mi" || is_pairwise_postprocessing(m)) {
        if (!mi) throw std::runtime_error("mutual information failed: " + mi_error);
        if (m == "mi") scores = *mi;
        else if (m == "clr") scores = clr(*mi);
        else if (m == "aracne") scores = aracne(*mi, c.method.aracne_tolerance);
        else scores = network_deconvolution(*mi, c.method.nd_beta);
      } else if (m == "plml1") {
        PlmL1Settings s;
        s.grid_size = c.method.grid_size;
        s.rule = c.method.l1_rule;
        s.threads = inner_threads;
        scores = plml1_scores(rep.data, s);
      } else {
        PlmDcaSettings s;
        s.lambda_bias = c.method.plm_lambda_bias;
        s.lambda_couple = c.method.plm_lambda_couple;
        s.apply_apc = c.method.plmdca_apc;
        s.threads = inner_threads;
        scores = plmdca_scores(rep.data, s);
      }
      const double elapsed = detail::seconds_since(t0);
      row.runtime_seconds = m == "mi" ? mi_seconds : elapsed;
      row.mi_runtime_seconds = is_pairwise_postprocessing(m) ? mi_seconds : 0.0;

      const auto curve = pr_curve(rank_edges(scores), truth);
      row.auc = curve.auc;
      row.rc090 = curve.rc_at.at(0.90);
      if (c.persist_artifacts) {
        detail::write_file(dir / ("scores_" + m + ".csv"), [&](std::ostream& os) { write_scores_csv(os, scores); });
        detail::write_file(dir / ("pr_" + m + ".csv"), [&](std::ostream& os) { write_pr_csv(os, curve); });
      }
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

/// Full pipeline. Replicates run in parallel (or each replicate internally
/// parallel with inner_parallel); output order is (replicate, method order).
inline ResultsTable run_experiment(const ExperimentConfig& c) {
  validate(c);
  const unsigned threads = std::max(1u, c.threads);
  const unsigned outer = c.inner_parallel ? 1u : std::min<unsigned>(threads, static_cast<unsigned>(c.replicates));
  const unsigned inner = c.inner_parallel ? threads : 1u;

  std::vector<ResultsTable> per_rep(static_cast<std::size_t>(c.replicates));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < c.replicates; r = next++) per_rep[r] = run_replicate(c, r, inner);
  };
  if (outer == 1) {
    worker();
  } else {
    std::vector<std::jthread> team;
    for (unsigned t = 0; t < outer; ++t) team.emplace_back(worker);
  }
  ResultsTable all;
  for (auto& rows : per_rep) all.insert(all.end(), rows.begin(), rows.end());
  return all;
}

inline bool any_failed(const ResultsTable& t) {
  return std::any_of(t.begin(), t.end(), [](const ResultRow& r) { return r.status != "ok"; });
}

namespace detail {
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch == '\n' ? ' ' : ch;
  }
  return q + '"';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
      else if (ch == '"') quoted = false;
      else cur += ch;
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}
}  // namespace detail

inline constexpr const char* kResultsHeader =
    "method,network,d,n,rep,auc,rc090,runtime_seconds,mi_runtime_seconds,status";

inline void write_results_csv(std::ostream& os, const ResultsTable& t) {
  std::ostringstream out;
  out << std::setprecision(17) << kResultsHeader << '\n';
  for (const auto& r : t)
    out << r.method << ',' << r.network << ',' << r.d << ',' << r.n << ',' << r.replicate << ',' << r.auc << ','
        << r.rc090 << ',' << r.runtime_seconds << ',' << r.mi_runtime_seconds << ',' << detail::csv_field(r.status) << '\n';
  os << out.str();
}

inline ResultsTable read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kResultsHeader) throw std::runtime_error("results csv: unexpected header");
  ResultsTable t;
  auto num = [](const std::string& s) {
    return (s == "nan" || s == "-nan") ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 10) throw std::runtime_error("results csv: expected 10 fields");
    ResultRow r;
    r.method = f[0];
    r.network = f[1];
    r.d = std::stoi(f[2]);
    r.n = std::stoul(f[3]);
    r.replicate = std::stoi(f[4]);
    r.auc = num(f[5]);
    r.rc090 = num(f[6]);
    r.runtime_seconds = num(f[7]);
    r.mi_runtime_seconds = num(f[8]);
    r.status = f[9];
    t.push_back(r);
  }
  return t;
}

struct Distribution {
  double mean = 0, sd = 0, q1 = 0, median = 0, q3 = 0;
};

/// Mean, sample sd and linearly interpolated quartiles; empty input gives NaNs.
inline Distribution describe(std::vector<double> xs) {
  Distribution s;
  if (xs.empty()) {
    s.mean = s.sd = s.q1 = s.median = s.q3 = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(xs.begin(), xs.end());
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
  };
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  return s;
}

struct SummaryRow {
  std::string method;
  std::string network;
  int d = 0;
  std::size_t n = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  Distribution auc;
  Distribution rc090;
  double runtime_mean = 0.0;
  double mi_runtime_mean = 0.0;
};

/// Groups by (method, network, d, n); failed rows are counted but excluded from the statistics.
inline std::vector<SummaryRow> aggregate(const ResultsTable& t) {
  if (t.empty()) throw std::invalid_argument("aggregate: empty results");
  using Key = std::tuple<std::string, std::string, int, std::size_t>;
  std::vector<Key> order;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& r : t) {
    Key k{r.method, r.network, r.d, r.n};
    if (!groups.contains(k)) order.push_back(k);
    groups[k].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& k : order) {
    SummaryRow s;
    std::tie(s.method, s.network, s.d, s.n) = k;
    std::vector<double> auc, rc, rt, mrt;
    for (const auto* r : groups[k]) {
      if (r->status != "ok") {
        ++s.failed;
        continue;
      }
      ++s.succeeded;
      auc.push_back(r->auc);
      rc.push_back(r->rc090);
      rt.push_back(r->runtime_seconds);
      mrt.push_back(r->mi_runtime_seconds);
    }
    s.auc = describe(auc);
    s.rc090 = describe(rc);
    s.runtime_mean = describe(rt).mean;
    s.mi_runtime_mean = describe(mrt).mean;
    out.push_back(s);
  }
  return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(17)
      << "method,network,d,n,reps,failed,auc_mean,auc_sd,auc_q1,auc_median,auc_q3,"
         "rc090_mean,rc090_sd,rc090_q1,rc090_median,rc090_q3,runtime_mean,mi_runtime_mean\n";
  for (const auto& s : rows) {
    out << s.method << ',' << s.network << ',' << s.d << ',' << s.n << ',' << s.succeeded << ',' << s.failed;
    for (const auto* dist : {&s.auc, &s.rc090})
      out << ',' << dist->mean << ',' << dist->sd << ',' << dist->q1 << ',' << dist->median << ',' << dist->q3;
    out << ',' << s.runtime_mean << ',' << s.mi_runtime_mean << '\n';
  }
  os << out.str();
}

/// run_experiment plus results.csv / summary.csv / config.json under output_dir.
inline ResultsTable run_and_persist(const ExperimentConfig& c) {
  validate(c);
  std::filesystem::create_directories(c.output_dir);
  detail::write_file(std::filesystem::path(c.output_dir) / "config.json",
                     [&](std::ostream& os) { os << config_to_json(c).dump(2) << '\n'; });
  auto results = run_experiment(c);
  const auto dir = std::filesystem::path(c.output_dir);
  detail::write_file(dir / "results.csv", [&](std::ostream& os) { write_results_csv(os, results); });
  detail::write_file(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, aggregate(results)); });
  return results;
}

}  // namespace mrfbench
