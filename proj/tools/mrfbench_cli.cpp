// Command-line front end: each stage reads and writes the library's file formats,
// so stages can be run one at a time or as a single pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mrfbench/mrfbench.hpp"

namespace fs = std::filesystem;
using namespace mrfbench;

namespace {

unsigned resolve_threads(int flag) {
  if (flag > 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("MRF_BENCH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return is;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

Dataset load_dataset(const std::string& path) {
  auto is = open_in(path);
  return fs::path(path).extension() == ".srbm" ? read_dataset_binary(is) : read_dataset_csv(is);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-learning benchmark for binary pairwise Markov networks"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a ground-truth graph and draw Ising parameters");
  std::string gen_type = "grid", gen_out = ".", gen_attach = "degree";
  int gen_d = 40, gen_m0 = 3, gen_m = 2, gen_k = 4;
  double gen_p = 0.25;
  std::uint64_t gen_seed = 1;
  gen->add_option("--type", gen_type, "grid | scale_free | small_world")->capture_default_str();
  gen->add_option("--d", gen_d, "Node count")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_option("--m0", gen_m0, "Scale-free seed size")->capture_default_str();
  gen->add_option("--m", gen_m, "Scale-free edges per new node")->capture_default_str();
  gen->add_option("--attachment", gen_attach, "Scale-free attachment: degree | uniform")->capture_default_str();
  gen->add_option("--k", gen_k, "Small-world ring neighbours")->capture_default_str();
  gen->add_option("--p", gen_p, "Small-world rewiring probability")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory (graph.txt, model.json)")->capture_default_str();

  // sample
  auto* smp = app.add_subcommand("sample", "Draw observations from a model with the sRBM block-Gibbs sampler");
  std::string smp_model, smp_out = "data.csv", smp_binary;
  std::size_t smp_n = 200, smp_burn = 2000, smp_thin = 50;
  std::uint64_t smp_seed = 1;
  int smp_threads = 0;
  smp->add_option("--model", smp_model, "model.json")->required();
  smp->add_option("--n", smp_n, "Sample count")->capture_default_str();
  smp->add_option("--burn-in", smp_burn, "Burn-in sweeps")->capture_default_str();
  smp->add_option("--thinning", smp_thin, "Sweeps between retained samples")->capture_default_str();
  smp->add_option("--seed", smp_seed, "Random seed")->capture_default_str();
  smp->add_option("--threads", smp_threads, "Worker threads (fallback MRF_BENCH_THREADS)");
  smp->add_option("--out", smp_out, "CSV output")->capture_default_str();
  smp->add_option("--binary", smp_binary, "Also write the bit-packed SRBM format here");

  // infer
  auto* inf = app.add_subcommand("infer", "Score all node pairs with one structure-learning method");
  std::string inf_data, inf_method = "plmdca", inf_out = "scores.csv", inf_ranked, inf_rule = "or";
  int inf_grid = 100, inf_threads = 0;
  double inf_beta = 0.95, inf_tol = 0.0;
  inf->add_option("--data", inf_data, "data.csv or data.srbm")->required();
  inf->add_option("--method", inf_method, "mi | clr | aracne | nd | plml1 | plmdca")->capture_default_str();
  inf->add_option("--grid-size", inf_grid, "plmL1 grid size")->capture_default_str();
  inf->add_option("--l1-rule", inf_rule, "plmL1 edge rule: or | and")->capture_default_str();
  inf->add_option("--nd-beta", inf_beta, "ND eigenvalue bound")->capture_default_str();
  inf->add_option("--aracne-tolerance", inf_tol, "ARACNE DPI tolerance")->capture_default_str();
  inf->add_option("--threads", inf_threads, "Worker threads (fallback MRF_BENCH_THREADS)");
  inf->add_option("--out", inf_out, "Score matrix CSV")->capture_default_str();
  inf->add_option("--ranked", inf_ranked, "Also write the ranked edge list here");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Precision-recall evaluation of a score matrix against a graph");
  std::string ev_scores, ev_graph, ev_out;
  ev->add_option("--scores", ev_scores, "Score matrix CSV")->required();
  ev->add_option("--graph", ev_graph, "graph.txt")->required();
  ev->add_option("--out", ev_out, "PR curve CSV");

  // run
  auto* run = app.add_subcommand("run", "Full pipeline from a JSON config");
  std::string run_config, run_out, run_methods;
  std::uint64_t run_seed = 0;
  int run_threads = 0;
  run->add_option("--config", run_config, "Experiment config JSON (defaults used when omitted)");
  run->add_option("--seed", run_seed, "Override seed");
  run->add_option("--threads", run_threads, "Worker threads (fallback MRF_BENCH_THREADS)");
  run->add_option("--out", run_out, "Override output directory");
  run->add_option("--methods", run_methods, "Override method list (comma separated)");

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Summarize a results.csv");
  std::string agg_in, agg_out = "summary.csv";
  agg->add_option("--results", agg_in, "results.csv")->required();
  agg->add_option("--out", agg_out, "summary.csv")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      ExperimentConfig c;
      c.network = parse_network_type(gen_type);
      c.d = gen_d;
      c.generator = {gen_m0, gen_m, gen_attach == "uniform" ? Attachment::uniform : Attachment::degree_proportional, gen_k, gen_p};
      if (gen_attach != "uniform" && gen_attach != "degree") throw std::invalid_argument("--attachment must be degree or uniform");
      Engine graph_rng = make_engine(gen_seed, 0);
      Engine param_rng = make_engine(gen_seed, 1);
      const Graph g = generate_network(c, graph_rng);
      const IsingModel model = draw_parameters(g, param_rng);
      fs::create_directories(gen_out);
      {
        auto os = open_out((fs::path(gen_out) / "graph.txt").string());
        write_graph(os, g);
      }
      auto os = open_out((fs::path(gen_out) / "model.json").string());
      os << model_to_json(model).dump(1) << '\n';
      const auto s = structural_stats(g);
      std::cout << "d=" << g.num_nodes() << " edges=" << g.num_edges() << " avg_degree=" << s.avg_degree
                << " max_degree=" << s.max_degree << " avg_clustering=" << s.avg_clustering << '\n';
    } else if (*smp) {
      auto is = open_in(smp_model);
      const auto model = model_from_json(nlohmann::json::parse(is));
      GibbsSettings gs{smp_burn, smp_thin, resolve_threads(smp_threads)};
      const auto data = gibbs_sample(build_srbm(model), smp_n, gs, smp_seed);
      {
        auto os = open_out(smp_out);
        write_dataset_csv(os, data);
      }
      if (!smp_binary.empty()) {
        auto os = open_out(smp_binary);
        write_dataset_binary(os, data);
      }
    } else if (*inf) {
      const auto data = load_dataset(inf_data);
      const unsigned threads = resolve_threads(inf_threads);
      ScoreMatrix scores;
      if (inf_method == "mi") scores = mutual_information_matrix(data);
      else if (inf_method == "clr") scores = clr(mutual_information_matrix(data));
      else if (inf_method == "aracne") scores = aracne(mutual_information_matrix(data), inf_tol);
      else if (inf_method == "nd") scores = network_deconvolution(mutual_information_matrix(data), inf_beta);
      else if (inf_method == "plml1") {
        if (inf_rule != "or" && inf_rule != "and") throw std::invalid_argument("--l1-rule must be or/and");
        PlmL1Settings s;
        s.grid_size = inf_grid;
        s.rule = inf_rule == "or" ? EdgeRule::either : EdgeRule::both;
        s.threads = threads;
        scores = plml1_scores(data, s);
      } else if (inf_method == "plmdca") {
        PlmDcaSettings s;
        s.threads = threads;
        scores = plmdca_scores(data, s);
      } else {
        throw std::invalid_argument("unknown method '" + inf_method + "'");
      }
      {
        auto os = open_out(inf_out);
        write_scores_csv(os, scores);
      }
      if (!inf_ranked.empty()) {
        auto os = open_out(inf_ranked);
        write_ranked_edges(os, rank_edges(scores));
      }
    } else if (*ev) {
      auto sis = open_in(ev_scores);
      auto gis = open_in(ev_graph);
      const auto scores = read_scores_csv(sis);
      const auto truth = read_graph(gis);
      const auto curve = pr_curve(rank_edges(scores), truth);
      if (!ev_out.empty()) {
        auto os = open_out(ev_out);
        write_pr_csv(os, curve);
      }
      std::cout << "auc=" << curve.auc << " rc090=" << curve.rc_at.at(0.90) << '\n';
    } else if (*run) {
      ExperimentConfig c;
      if (!run_config.empty()) {
        auto is = open_in(run_config);
        c = config_from_json(nlohmann::json::parse(is));
      }
      if (run->count("--seed")) c.seed = run_seed;
      if (!run_out.empty()) c.output_dir = run_out;
      if (!run_methods.empty()) c.methods = split_list(run_methods);
      if (run_threads > 0 || std::getenv("MRF_BENCH_THREADS")) c.threads = resolve_threads(run_threads);
      const auto results = run_and_persist(c);
      for (const auto& s : aggregate(results))
        std::cout << s.method << ' ' << s.network << " d=" << s.d << " n=" << s.n << " auc=" << s.auc.mean
                  << " rc090=" << s.rc090.mean << " runtime=" << s.runtime_mean << "s\n";
      if (any_failed(results)) {
        for (const auto& r : results)
          if (r.status != "ok") std::cerr << "replicate " << r.replicate << ' ' << r.method << ": " << r.status << '\n';
        return 2;
      }
    } else if (*agg) {
      auto is = open_in(agg_in);
      const auto results = read_results_csv(is);
      auto os = open_out(agg_out);
      write_summary_csv(os, aggregate(results));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
