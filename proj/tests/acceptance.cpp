// Acceptance suite: one PASS/FAIL line per benchmark-level requirement.
// Exit status is non-zero when any requirement fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mrfbench/mrfbench.hpp"
#include "oracles.hpp"

using namespace mrfbench;

namespace {

int g_failures = 0;

void report(bool ok, const std::string& name, const std::string& detail, double seconds) {
  if (!ok) ++g_failures;
  std::printf("%s  %-58s %s  [%.1fs]\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double mean(const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size(); }

ScoreMatrix exact_mi_matrix(const IsingModel& model) {
  const auto dist = enumerate_distribution(model);
  ScoreMatrix mi(model.num_nodes());
  for (int v = 0; v < model.num_nodes(); ++v)
    for (int w = v + 1; w < model.num_nodes(); ++w) mi.set(v, w, table_mutual_information(exact_pair_marginal(dist, v, w)));
  return mi;
}

// ---------------------------------------------------------------------------------------------

void structural_statistics() {
  {
    Timer t;
    const auto g40 = structural_stats(generate_grid(5, 8));
    const auto g200 = structural_stats(generate_grid(10, 20));
    const bool ok = g40.avg_degree == 3.35 && g200.avg_degree == 3.70 && g40.avg_clustering == 0.0 &&
                    g200.avg_clustering == 0.0 && g40.max_degree == 4 && g200.max_degree == 4;
    report(ok, "structure grid: degree 3.35/3.70, clustering 0, max degree 4",
           fmt("avg %.2f/%.2f", g40.avg_degree, g200.avg_degree) +
               fmt(" clust %g/%g", g40.avg_clustering, g200.avg_clustering) + " max " +
               std::to_string(g40.max_degree) + "/" + std::to_string(g200.max_degree),
           t.seconds());
  }
  {
    Timer t;
    bool exact_degree = true;
    std::vector<double> maxdeg, clust;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Engine rng = make_engine(seed);
      const auto s = structural_stats(generate_small_world(40, 4, 0.25, rng));
      exact_degree = exact_degree && s.avg_degree == 4.0;
      maxdeg.push_back(s.max_degree);
      clust.push_back(s.avg_clustering);
    }
    report(exact_degree, "structure small-world: avg degree exactly 4 (50 seeds)", "", t.seconds());
    report(std::abs(mean(maxdeg) - 6.24) <= 3 * 0.69, "structure small-world d=40: max degree mean in 6.24 +- 2.07",
           fmt("mean %.3f", mean(maxdeg)), t.seconds());
    report(std::abs(mean(clust) - 0.27) <= 0.10, "structure small-world d=40: clustering mean in 0.27 +- 0.10",
           fmt("mean %.4f", mean(clust)), t.seconds());
  }
  for (auto rule : {Attachment::degree_proportional, Attachment::uniform}) {
    const std::string tag = rule == Attachment::uniform ? " [uniform attachment, reference]" : "";
    Timer t;
    std::vector<double> deg40, max1000;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Engine a = make_engine(seed, 40);
      deg40.push_back(structural_stats(generate_scale_free(40, 3, 2, a, rule)).avg_degree);
      Engine b = make_engine(seed, 1000);
      max1000.push_back(structural_stats(generate_scale_free(1000, 3, 2, b, rule)).max_degree);
    }
    const double secs = t.seconds();
    if (rule == Attachment::degree_proportional) {
      report(std::abs(mean(deg40) - 4.00) <= 0.25, "structure scale-free d=40: avg degree in 4.00 +- 0.25",
             fmt("mean %.3f", mean(deg40)), secs);
      report(std::abs(mean(max1000) - 19.4) <= 3 * 2.08, "structure scale-free d=1000: max degree mean in 19.4 +- 6.24",
             fmt("mean %.2f", mean(max1000)), secs);
    } else {
      std::printf("INFO  scale-free%s: d=40 avg degree %.3f, d=1000 max degree mean %.2f\n", tag.c_str(), mean(deg40),
                  mean(max1000));
    }
  }
}

void sampler_correctness() {
  Timer t;
  Engine rng = make_engine(2024);
  double worst = 0;
  for (int k = 0; k < 5; ++k) {
    const auto model = oracle::random_model(6, 0.5, rng);
    const auto data = gibbs_sample(build_srbm(model), 50000, GibbsSettings{}, derive_key(2024, k));
    worst = std::max(worst, total_variation(empirical_distribution(data), enumerate_distribution(model).probs));
  }
  const double secs = t.seconds();
  report(worst < 0.02 && secs < 120, "sampler: TV(50k thinned samples, exact) < 0.02 on 5 models",
         fmt("worst TV %.4f", worst), secs);
}

void srbm_identity() {
  Timer t;
  Engine rng = make_engine(7);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + static_cast<int>(uniform_index(rng, 49));
    const auto model = oracle::random_model(d, 0.2, rng);
    const auto gram = build_srbm(model).gram();
    const auto a = model.interaction_matrix();
    for (int v = 0; v < d; ++v)
      for (int w = 0; w < d; ++w)
        if (v != w) worst = std::max(worst, std::abs(gram[v * d + w] - a[v * d + w]));
  }
  report(worst <= 1e-12, "srbm mapping: off-diagonal W'W equals A (100 models)", fmt("max dev %.2e", worst), t.seconds());
}

void mutual_information() {
  Timer t;
  const double direct = 0.9 * std::log(1.8) + 0.1 * std::log(0.2);
  const double got = smoothed_mutual_information(2, 0, 0, 2);
  report(std::abs(got - direct) <= 1e-12, "mi: counts (2,0,0,2) match direct evaluation",
         fmt("got %.15f, |diff| %.1e", got, std::abs(got - direct)), t.seconds());

  Timer t2;
  Engine rng = make_engine(11);
  const auto model = oracle::random_model(4, 0.7, rng);
  const auto exact = exact_mi_matrix(model);
  const auto sampler = build_srbm(model);
  std::vector<double> errs;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    const auto mi = mutual_information_matrix(gibbs_sample(sampler, n, GibbsSettings{}, 500 + n));
    double err = 0;
    for (int v = 0; v < 4; ++v)
      for (int w = v + 1; w < 4; ++w) err += std::abs(mi(v, w) - exact(v, w));
    errs.push_back(err);
  }
  report(errs[0] > errs[1] && errs[1] > errs[2], "mi: empirical MI converges monotonically to exact MI",
         "sum |err| " + fmt("%.4f > ", errs[0]) + fmt("%.4f > ", errs[1]) + fmt("%.5f", errs[2]), t2.seconds());
}

void aracne_checks() {
  Timer t;
  ScoreMatrix four(4);
  four.set(0, 1, 5);
  four.set(0, 2, 4);
  four.set(1, 2, 3);
  four.set(2, 3, 2);
  four.set(1, 3, 1);
  const auto out = aracne(four, 0.0);
  const bool instance = out(1, 2) == 0 && out(1, 3) == 0 && out(0, 1) == 5 && out(0, 2) == 4 && out(2, 3) == 2;
  report(instance, "aracne: four-node instance drops 2-3 and 2-4, keeps the rest", "", t.seconds());

  Timer t2;
  Engine rng = make_engine(13);
  ScoreMatrix mi(12);
  for (int v = 0; v < 12; ++v)
    for (int w = v + 1; w < 12; ++w) mi.set(v, w, uniform01(rng));
  const auto reference = aracne(mi, 0.0);
  auto triplets = all_triplets(12);
  int mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    std::shuffle(triplets.begin(), triplets.end(), rng);
    mismatches += aracne(mi, 0.0, triplets).dense() != reference.dense();
  }
  report(mismatches == 0, "aracne: invariant to triplet order (100 shuffles)",
         std::to_string(mismatches) + " mismatches", t2.seconds());
}

void deconvolution_round_trip() {
  Timer t;
  Engine rng = make_engine(17);
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    const int d = 5 + static_cast<int>(uniform_index(rng, 36));
    const double radius = 0.9 * (0.2 + 0.8 * uniform01(rng));
    const Eigen::MatrixXd dir = oracle::random_symmetric(d, radius, rng);
    worst = std::max(worst, (deconvolve(oracle::geometric_series(dir), std::nullopt) - dir).cwiseAbs().maxCoeff());
  }
  report(worst <= 1e-8, "nd: series forward map then deconvolution recovers input", fmt("max-norm %.2e", worst),
         t.seconds());
}

void plm_gradient() {
  Timer t;
  Engine rng = make_engine(19);
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    const auto data = oracle::random_dataset(50, 10, rng);
    for (int p = 0; p < 10; ++p) {
      const int v = static_cast<int>(uniform_index(rng, 10));
      Eigen::VectorXd theta(10);
      for (int j = 0; j < 10; ++j) theta(j) = 3 * (2 * uniform01(rng) - 1);
      const auto f = [&](const Eigen::VectorXd& x) { return oracle::conditional_log_likelihood(data, v, x); };
      const Eigen::VectorXd fd = oracle::central_differences(f, theta);
      worst = std::max(worst, (node_gradient({v, theta}, data) - fd).norm() / fd.norm());
    }
  }
  report(worst < 1e-5, "plm: gradient vs central differences (100 points)", fmt("max rel err %.2e", worst),
         t.seconds());
}

void plm_consistency() {
  Timer t;
  const IsingModel model(Graph(4, {{1, 2}}), {0.2, -0.3, 0.1, 0.4}, {1.5});
  const auto data = gibbs_sample(build_srbm(model), 100000, GibbsSettings{}, 99);
  const auto fits = fit_all_nodes_l2(data, 1e-6, 1e-6);
  const double a = fits[1].theta(2), b = fits[2].theta(1);
  report(std::abs(a - 1.5) <= 0.1 && std::abs(b - 1.5) <= 0.1, "plm: single edge theta=1.5, n=1e5, both estimates +- 0.1",
         fmt("theta_12 %.4f, theta_21 %.4f", a, b), t.seconds());
}

// ---------------------------------------------------------------------------------------------

using MeanTable = std::map<std::tuple<std::string, std::string, std::size_t>, double>;  // (method, network, n)

ResultsTable g_benchmark_rows;

MeanTable benchmark_means(unsigned threads) {
  MeanTable means;
  std::map<std::tuple<std::string, std::string, std::size_t>, int> counts;
  for (auto net : {NetworkType::grid, NetworkType::scale_free, NetworkType::small_world}) {
    for (std::size_t n : {200u, 5000u}) {
      ExperimentConfig c;
      c.network = net;
      c.d = 40;
      c.n = n;
      c.replicates = 10;
      c.seed = 31337;
      c.threads = threads;
      c.persist_artifacts = false;
      Timer t;
      const auto rows = run_experiment(c);
      double per_method_runtime[6] = {};
      for (const auto& r : rows) {
        if (r.status != "ok") {
          std::printf("INFO  %s %s n=%zu rep %d failed: %s\n", r.method.c_str(), r.network.c_str(), n, r.replicate,
                      r.status.c_str());
          continue;
        }
        const auto key = std::make_tuple(r.method, r.network, n);
        means[key] += r.auc;
        ++counts[key];
        const auto idx = std::find(known_methods().begin(), known_methods().end(), r.method) - known_methods().begin();
        per_method_runtime[idx] += r.runtime_seconds;
      }
      g_benchmark_rows.insert(g_benchmark_rows.end(), rows.begin(), rows.end());
      std::printf("INFO  %-11s n=%-4zu (%.0fs)", to_string(net).c_str(), n, t.seconds());
      for (std::size_t m = 0; m < known_methods().size(); ++m) {
        const auto key = std::make_tuple(known_methods()[m], to_string(net), n);
        std::printf("  %s=%.3f", known_methods()[m].c_str(), counts[key] ? means[key] / counts[key] : NAN);
      }
      std::printf("\n");
      std::fflush(stdout);
    }
  }
  for (auto& [key, total] : means) total /= counts[key];
  return means;
}

void benchmark_checks() {
  Timer t;
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  const MeanTable m = benchmark_means(threads);
  const double secs = t.seconds();
  auto auc = [&](const std::string& method, const std::string& net, std::size_t n) {
    const auto it = m.find({method, net, n});
    return it == m.end() ? NAN : it->second;
  };
  const std::vector<std::string> nets{"grid", "scale_free", "small_world"};

  {
    bool ok = true;
    std::string detail;
    for (const auto& net : nets) {
      ok = ok && auc("plmdca", net, 5000) > auc("mi", net, 5000);
      detail += net + fmt(" %.3f>%.3f ", auc("plmdca", net, 5000), auc("mi", net, 5000));
    }
    report(ok, "benchmark (a): n=5000 plmDCA AUC > MI AUC, all networks", detail, secs);
  }
  {
    bool ok = true;
    std::string detail = fmt("plmdca %.3f vs", auc("plmdca", "grid", 5000));
    for (const char* method : {"mi", "clr", "aracne", "nd"}) {
      ok = ok && auc("plmdca", "grid", 5000) >= auc(method, "grid", 5000);
      detail += std::string(" ") + method + fmt(" %.3f", auc(method, "grid", 5000));
    }
    report(ok, "benchmark (b): n=5000 grid plmDCA AUC >= every pairwise AUC", detail, secs);
  }
  {
    bool ok = true;
    std::string detail;
    for (const auto& net : nets) {
      ok = ok && auc("plml1", net, 200) < auc("plmdca", net, 200);
      detail += net + fmt(" %.3f<%.3f ", auc("plml1", net, 200), auc("plmdca", net, 200));
    }
    report(ok, "benchmark (c): n=200 plmL1 AUC < plmDCA AUC, all networks", detail, secs);
  }
  report(auc("aracne", "small_world", 5000) < auc("aracne", "grid", 5000),
         "benchmark (d): n=5000 ARACNE small-world AUC < grid AUC",
         fmt("%.3f < %.3f", auc("aracne", "small_world", 5000), auc("aracne", "grid", 5000)), secs);
}

void runtime_accounting() {
  Timer t;
  std::stringstream csv;
  write_results_csv(csv, g_benchmark_rows);
  const std::string header = csv.str().substr(0, csv.str().find('\n'));
  const bool has_column = header.find("mi_runtime_seconds") != std::string::npos;
  const auto rows = read_results_csv(csv);
  // per replicate: post-processing rows carry the replicate's MI time, which equals the MI row's runtime
  std::map<std::tuple<std::string, std::size_t, int>, double> mi_time;
  for (const auto& r : rows)
    if (r.method == "mi") mi_time[{r.network, r.n, r.replicate}] = r.runtime_seconds;
  bool consistent = !rows.empty();
  std::size_t checked = 0;
  for (const auto& r : rows) {
    if (!is_pairwise_postprocessing(r.method)) {
      consistent = consistent && r.mi_runtime_seconds == 0.0;
      continue;
    }
    const auto it = mi_time.find({r.network, r.n, r.replicate});
    consistent = consistent && it != mi_time.end() && r.mi_runtime_seconds == it->second && r.mi_runtime_seconds > 0;
    ++checked;
  }
  report(has_column && consistent, "runtime: results.csv reports MI time separately from post-processing",
         std::to_string(checked) + " post-processing rows checked", t.seconds());
}

}  // namespace

int main() {
  Timer total;
  const std::pair<const char*, void (*)()> sections[] = {
      {"structural statistics", structural_statistics},
      {"sampler", sampler_correctness},
      {"srbm mapping", srbm_identity},
      {"mutual information", mutual_information},
      {"aracne", aracne_checks},
      {"network deconvolution", deconvolution_round_trip},
      {"plm gradient", plm_gradient},
      {"plm consistency", plm_consistency},
      {"benchmark", benchmark_checks},
      {"runtime accounting", runtime_accounting},
  };
  for (const auto& [name, run] : sections) {
    try {
      run();
    } catch (const std::exception& e) {
      report(false, std::string(name) + ": aborted", e.what(), 0.0);
    }
  }
  std::printf("%s  %d requirement(s) failed  [%.0fs total]\n", g_failures ? "FAIL" : "PASS", g_failures,
              total.seconds());
  return g_failures ? 1 : 0;
}
