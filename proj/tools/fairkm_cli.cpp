// fairkm command-line front end.
//
// Exit codes: 0 success, 2 infeasible target, 3 configuration error, 4 I/O error.

#include "fairkm/fairkm.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace fairkm;

constexpr int kExitInfeasible = 2;
constexpr int kExitConfig     = 3;
constexpr int kExitIo         = 4;

struct DataArgs
{
  std::string              path;
  std::vector<std::string> sensitive;
  std::string              id_column;
  bool                     no_scale{false};

  void add(CLI::App *app)
  {
    app->add_option("--data", path, "input CSV with a header row")->required();
    app->add_option("--sensitive", sensitive, "sensitive column name(s)")->required()->delimiter(',');
    app->add_option("--id-column", id_column, "column to ignore as an identifier");
    app->add_flag("--no-scale", no_scale, "use feature values as given instead of min-max scaling");
  }

  IngestedData load() const
  {
    IngestOptions opt;
    opt.sensitive = sensitive;
    if (!id_column.empty())
    {
      opt.id_column = id_column;
    }
    opt.scale = !no_scale;
    return ingest_csv(path, opt);
  }
};

struct RunArgs
{
  std::string           algo{"mpfc"};
  std::size_t           k{2};
  std::string           lambda;
  std::string           target;
  std::string           seeds{"0"};
  std::optional<double> max_time;
  double                delta{0.001};
  std::size_t           max_iter{100};
  std::size_t           r{100};
  std::optional<double> solve_cap;
  std::size_t           threads{1};
  std::string           batch_cache;
  std::uint64_t         batch_seed{0};

  void add(CLI::App *app, bool with_fairness = true)
  {
    app->add_option("--algo", algo, "mpfc | flow | smpfc | lloyd")->capture_default_str();
    app->add_option("--k", k, "number of clusters")->required();
    if (with_fairness)
    {
      auto *l = app->add_option("--lambda", lambda, "tolerance in [0,1]; target = (1-lambda) * feasible balance");
      auto *t = app->add_option("--target", target, "explicit target balance per sensitive feature (comma list)");
      l->excludes(t);
    }
    app->add_option("--seeds", seeds, "seed range a-b or comma list")->capture_default_str();
    app->add_option("--max-time", max_time, "time budget in seconds for all seeds");
    app->add_option("--delta", delta, "minimum relative improvement")->capture_default_str();
    app->add_option("--max-iter", max_iter, "iteration cap per run")->capture_default_str();
    app->add_option("--r", r, "number of batches (smpfc)")->capture_default_str();
    app->add_option("--solve-cap", solve_cap, "time cap in seconds per assignment solve");
    app->add_option("--threads", threads, "seeds run concurrently")->capture_default_str();
    app->add_option("--batch-cache", batch_cache, "file to load/store the smpfc batch set");
    app->add_option("--batch-seed", batch_seed, "seed for batch construction")->capture_default_str();
  }

  RunConfig config() const
  {
    RunConfig c;
    c.algorithm  = parse_algorithm(algo);
    c.k          = k;
    c.max_time   = max_time;
    c.delta      = delta;
    c.max_iter   = max_iter;
    c.seeds      = parse_seed_list(seeds);
    c.r          = r;
    c.threads    = threads;
    c.batch_seed = batch_seed;
    if (solve_cap)
    {
      c.solver.time_cap_seconds = *solve_cap;
    }
    return c;
  }

  FairnessSpec spec() const
  {
    if (!target.empty())
    {
      return FairnessSpec::targets(parse_rational_list(target));
    }
    return FairnessSpec::tolerance(lambda.empty() ? Rational(0) : Rational::parse(lambda));
  }

  // Loads or builds the batch set when the algorithm needs one.
  std::optional<BatchSet> batches(Dataset const &data, RunConfig const &c, double &seconds) const
  {
    if (c.algorithm != Algorithm::Smpfc)
    {
      return std::nullopt;
    }
    if (!batch_cache.empty())
    {
      if (auto cached = load_batch_cache(batch_cache, data, c.r, c.batch_seed))
      {
        return cached;
      }
    }
    auto const t0  = detail::Clock::now();
    Rng        rng = make_rng(c.batch_seed, 1);
    auto       b   = build_batches(data, c.r, rng, c.batching);
    seconds        = detail::seconds_since(t0);
    if (!batch_cache.empty())
    {
      save_batch_cache(batch_cache, data, b, c.batch_seed);
    }
    return b;
  }
};

ResultFormat format_for(std::string const &path, std::string const &requested)
{
  if (requested == "csv" || (requested.empty() && path.ends_with(".csv")))
  {
    return ResultFormat::Csv;
  }
  return ResultFormat::Json;
}

void write_or_print(std::string const &path, std::vector<ExperimentRecord> const &recs, ResultFormat fmt)
{
  if (path.empty() || path == "-")
  {
    std::cout << render_results(recs, fmt);
  }
  else
  {
    emit_results(path, recs, fmt);
  }
}

void print_warnings(std::vector<std::string> const &warnings)
{
  for (auto const &w : warnings)
  {
    std::cerr << "warning: " << w << '\n';
  }
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Fair k-means clustering with balance constraints"};
  app.require_subcommand(1);

  // cluster
  DataArgs    c_data;
  RunArgs     c_run;
  std::string c_out;
  std::string c_results;
  auto       *cluster = app.add_subcommand("cluster", "cluster a dataset");
  c_data.add(cluster);
  c_run.add(cluster);
  cluster->add_option("--out", c_out, "labels CSV (index, cluster)");
  cluster->add_option("--results", c_results, "results file (.json or .csv); '-' for stdout");

  // gen
  std::string      g_kind{"a"};
  SyntheticOptions g_opt;
  std::string      g_out;
  auto            *gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--kind", g_kind, "a: one Gaussian, b: one Gaussian per group")->capture_default_str();
  gen->add_option("--n", g_opt.n)->capture_default_str();
  gen->add_option("--d", g_opt.d)->capture_default_str();
  gen->add_option("--groups", g_opt.groups)->capture_default_str();
  gen->add_option("--seed", g_opt.seed)->capture_default_str();
  gen->add_option("--sigma", g_opt.sigma)->capture_default_str();
  gen->add_option("--separation", g_opt.separation, "distance between group means in sigmas")->capture_default_str();
  gen->add_option("--out", g_out, "output CSV")->required();

  // eval
  DataArgs    e_data;
  std::string e_labels;
  std::string e_target;
  auto       *eval = app.add_subcommand("eval", "balance and cost of an existing labeling");
  e_data.add(eval);
  eval->add_option("--labels", e_labels, "labels CSV (index, cluster)")->required();
  eval->add_option("--target", e_target, "targets to check (comma list)");

  // sweep
  DataArgs    s_data;
  RunArgs     s_run;
  std::string s_lambdas{"0.01,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"};
  std::string s_out;
  std::string s_format;
  auto       *sweep = app.add_subcommand("sweep", "cost/balance trade-off over lambda");
  s_data.add(sweep);
  s_run.add(sweep, false);
  sweep->add_option("--lambdas", s_lambdas)->capture_default_str();
  sweep->add_option("--out", s_out, "results file; stdout when omitted");
  sweep->add_option("--format", s_format, "json | csv");

  // fairlet-params
  std::string f_target;
  auto       *fairlet = app.add_subcommand("fairlet-params", "integers (p, q) approximating a target balance");
  fairlet->add_option("--target", f_target, "target as fraction or decimal")->required();

  // bench
  DataArgs                 b_data;
  RunArgs                  b_run;
  std::vector<std::string> b_algos{"mpfc", "flow", "smpfc", "lloyd"};
  std::string              b_baseline{"mpfc"};
  std::string              b_out;
  std::string              b_format;
  auto                    *bench = app.add_subcommand("bench", "run several algorithms on one instance");
  b_data.add(bench);
  b_run.add(bench);
  bench->add_option("--algos", b_algos)->delimiter(',')->capture_default_str();
  bench->add_option("--baseline", b_baseline, "algorithm that gap percentages refer to")->capture_default_str();
  bench->add_option("--out", b_out, "results file; stdout when omitted");
  bench->add_option("--format", b_format, "json | csv");

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    int const code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try
  {
    if (*cluster)
    {
      auto const in     = c_data.load();
      auto const config = c_run.config();
      auto const spec   = c_run.spec();
      double     bsec   = 0.0;
      auto const b      = c_run.batches(in.data, config, bsec);
      auto       res    = run_multi(in.data, config, spec, b ? &*b : nullptr);
      res.batching_seconds += bsec;
      print_warnings(res.warnings);
      if (!c_out.empty())
      {
        write_labels_csv(c_out, res.best.labels);
      }
      auto const rec = make_record(c_data.path, config, spec, res);
      if (!c_results.empty())
      {
        write_or_print(c_results, {rec}, format_for(c_results, ""));
      }
      std::cout << "cost " << fixed(res.best.cost, 3) << " seed " << res.best.seed << " iterations "
                << res.best.iterations;
      for (std::size_t s = 0; s < res.targets.size(); ++s)
      {
        std::cout << " | " << in.data.feature(s).name << ": balance " << fixed(res.best.balances[s].to_double(), 3)
                  << " target " << res.targets[s] << (res.best.target_met[s] ? "" : " (not met)");
      }
      std::cout << '\n';
    }
    else if (*gen)
    {
      if (g_kind != "a" && g_kind != "b")
      {
        throw InvalidInput("--kind must be a or b");
      }
      g_opt.kind = g_kind == "a" ? SyntheticKind::A : SyntheticKind::B;
      write_dataset_csv(g_out, gen_synthetic(g_opt));
    }
    else if (*eval)
    {
      auto const in     = e_data.load();
      auto const labels = read_labels_csv(e_labels, in.data.n());
      std::size_t k     = 0;
      for (auto l : labels)
      {
        k = std::max(k, static_cast<std::size_t>(l) + 1);
      }
      auto const     report  = balance_report(labels, in.data, k);
      auto const     centers = update_centers(in.data.points(), labels, k);
      nlohmann::json doc;
      doc["schema_version"] = kSchemaVersion;
      doc["n"]              = in.data.n();
      doc["k"]              = k;
      doc["cost"]           = round_to(clustering_cost(in.data.points(), labels, centers), 3);
      std::vector<Rational> targets;
      if (!e_target.empty())
      {
        targets = parse_rational_list(e_target);
        if (targets.size() != in.data.feature_count())
        {
          throw InvalidInput("--target needs one value per sensitive feature");
        }
      }
      for (std::size_t s = 0; s < in.data.feature_count(); ++s)
      {
        nlohmann::json f;
        f["name"]                = in.data.feature(s).name;
        f["clustering_balance"]  = round_to(report.clustering[s].to_double(), 3);
        f["clustering_balance_exact"] = report.clustering[s].str();
        f["dataset_balance"]     = round_to(report.dataset[s].to_double(), 3);
        f["feasible_balance"]    = feasible_balance(in.data, s, k).str();
        nlohmann::json per       = nlohmann::json::array();
        for (auto const &b : report.per_cluster[s])
        {
          per.push_back(round_to(b.to_double(), 3));
        }
        f["per_cluster"] = per;
        if (!targets.empty())
        {
          f["target"]     = targets[s].str();
          f["target_met"] = report.clustering[s] >= targets[s];
        }
        doc["features"].push_back(f);
      }
      std::cout << doc.dump(2) << '\n';
    }
    else if (*sweep)
    {
      auto const in      = s_data.load();
      auto const config  = s_run.config();
      auto const lambdas = parse_rational_list(s_lambdas);
      double     bsec    = 0.0;
      auto const b       = s_run.batches(in.data, config, bsec);
      auto       recs    = sweep_tradeoff(in.data, s_data.path, config, lambdas, b ? &*b : nullptr);
      for (auto &r : recs)
      {
        r.batching_seconds = bsec;
      }
      write_or_print(s_out, recs, format_for(s_out, s_format));
    }
    else if (*fairlet)
    {
      auto const res = get_fairlet_integers(Rational::parse(f_target));
      nlohmann::json doc;
      doc["p"]        = res.p;
      doc["q"]        = res.q;
      doc["achieved"] = res.achieved.str();
      doc["achieved_value"] = res.achieved.to_double();
      std::cout << doc.dump() << '\n';
    }
    else if (*bench)
    {
      auto const                    in   = b_data.load();
      auto const                    spec = b_run.spec();
      std::vector<ExperimentRecord> recs;
      for (auto const &name : b_algos)
      {
        auto run_args = b_run;
        run_args.algo = name;
        auto const config = run_args.config();
        if (config.algorithm == Algorithm::Flow && in.data.feature_count() != 1)
        {
          std::cerr << "skipping flow: needs exactly one sensitive feature\n";
          continue;
        }
        double     bsec = 0.0;
        auto const b    = run_args.batches(in.data, config, bsec);
        // Lloyd ignores the fairness targets; it is the unconstrained reference.
        auto const use_spec = config.algorithm == Algorithm::Lloyd ? FairnessSpec::vanilla() : spec;
        try
        {
          auto res = run_multi(in.data, config, use_spec, b ? &*b : nullptr);
          res.batching_seconds += bsec;
          print_warnings(res.warnings);
          recs.push_back(make_record(b_data.path, config, spec, res));
          recs.back().algorithm = name;
        }
        catch (InfeasibleTarget const &e)
        {
          std::cerr << name << ": " << e.what() << '\n';
        }
      }
      if (recs.empty())
      {
        throw InfeasibleTarget("no algorithm produced a solution");
      }
      apply_baseline(recs, b_baseline);
      write_or_print(b_out, recs, format_for(b_out, b_format));
    }
  }
  catch (InfeasibleTarget const &e)
  {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  }
  catch (IoError const &e)
  {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  catch (Error const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  catch (std::exception const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
