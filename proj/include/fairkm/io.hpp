#pragma once

// CSV ingestion and export, synthetic fixtures, result records and the batch
// cache file.

#include "fairkm/batching.hpp"
#include "fairkm/core.hpp"
#include "fairkm/errors.hpp"
#include "fairkm/framework.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/random.hpp"
#include "fairkm/rational.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace fairkm {

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// CSV

/// Splits one CSV record. Fields may be double-quoted with "" as an escaped quote.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no)
{
  std::vector<std::string> out;
  std::string              cur;
  bool                     quoted      = false;
  bool                     was_quoted  = false;
  for (std::size_t i = 0; i < line.size(); ++i)
  {
    char const c = line[i];
    if (quoted)
    {
      if (c == '"')
      {
        if (i + 1 < line.size() && line[i + 1] == '"')
        {
          cur.push_back('"');
          ++i;
        }
        else
        {
          quoted = false;
        }
      }
      else
      {
        cur.push_back(c);
      }
      continue;
    }
    if (c == '"' && cur.empty() && !was_quoted)
    {
      quoted     = true;
      was_quoted = true;
    }
    else if (c == ',')
    {
      out.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    }
    else
    {
      cur.push_back(c);
    }
  }
  if (quoted)
  {
    throw InvalidInput("line " + std::to_string(line_no) + ": unterminated quoted field");
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string csv_escape(std::string_view field)
{
  if (field.find_first_of(",\"\n\r") == std::string_view::npos)
  {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field)
  {
    out += c;
    if (c == '"')
    {
      out += '"';
    }
  }
  return out + "\"";
}

inline std::optional<double> parse_number(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
  {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
  {
    s.remove_suffix(1);
  }
  if (!s.empty() && s.front() == '+')
  {
    s.remove_prefix(1);
  }
  double v   = 0.0;
  auto   res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
  {
    return std::nullopt;
  }
  return v;
}

struct CsvTable
{
  std::vector<std::string>              header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t>              line_numbers;
};

inline CsvTable read_csv(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw IoError("cannot open '" + path + "' for reading");
  }
  CsvTable    table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
    {
      line.pop_back();
    }
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF"))
    {
      line.erase(0, 3);
    }
    if (line.empty())
    {
      continue;
    }
    auto fields = split_csv_line(line, line_no);
    if (table.header.empty())
    {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
    {
      throw InvalidInput("line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                         " fields, found " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty())
  {
    throw InvalidInput("'" + path + "' has no header row");
  }
  return table;
}

struct IngestOptions
{
  std::vector<std::string>   sensitive;
  std::optional<std::string> id_column;
  bool                       scale{true};
};

struct IngestedData
{
  Dataset                  data;
  std::vector<std::string> feature_columns;
  std::vector<std::string> ids;  // empty without an id column
};

/// Dataset from a header-prefixed CSV. Sensitive columns become group labels
/// (groups numbered by first appearance); every other column except the id
/// column must be numeric and is min-max scaled.
inline IngestedData ingest_csv(std::string const &path, IngestOptions const &opt)
{
  if (opt.sensitive.empty())
  {
    throw InvalidInput("at least one sensitive column is required");
  }
  auto const table = read_csv(path);
  auto       find  = [&](std::string const &name) {
    for (std::size_t c = 0; c < table.header.size(); ++c)
    {
      if (table.header[c] == name)
      {
        return c;
      }
    }
    throw InvalidInput("column '" + name + "' not found in '" + path + "'");
  };
  std::vector<std::size_t> sens_cols;
  for (auto const &name : opt.sensitive)
  {
    sens_cols.push_back(find(name));
  }
  std::optional<std::size_t> id_col;
  if (opt.id_column)
  {
    id_col = find(*opt.id_column);
  }
  std::vector<std::size_t> num_cols;
  std::vector<std::string> feature_columns;
  std::vector<std::string> ids;
  for (std::size_t c = 0; c < table.header.size(); ++c)
  {
    if (std::find(sens_cols.begin(), sens_cols.end(), c) == sens_cols.end() && c != id_col)
    {
      num_cols.push_back(c);
      feature_columns.push_back(table.header[c]);
    }
  }
  if (num_cols.empty())
  {
    throw InvalidInput("'" + path + "' has no numeric feature columns");
  }
  std::size_t const n = table.rows.size();
  if (n == 0)
  {
    throw InvalidInput("'" + path + "' has no data rows");
  }
  Matrix raw(n, num_cols.size());
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t f = 0; f < num_cols.size(); ++f)
    {
      auto const &cell = table.rows[i][num_cols[f]];
      auto const  v    = parse_number(cell);
      if (!v || !std::isfinite(*v))
      {
        throw InvalidInput("line " + std::to_string(table.line_numbers[i]) + ", column '" +
                           table.header[num_cols[f]] + "': '" + cell + "' is not a finite number");
      }
      raw(i, f) = *v;
    }
  }
  std::vector<SensitiveFeature> feats;
  for (std::size_t s = 0; s < sens_cols.size(); ++s)
  {
    SensitiveFeature             feat;
    std::map<std::string, int>   index;
    feat.name = table.header[sens_cols[s]];
    feat.membership.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      auto const &cell = table.rows[i][sens_cols[s]];
      auto [it, fresh] = index.try_emplace(cell, static_cast<int>(feat.groups.size()));
      if (fresh)
      {
        feat.groups.push_back(cell);
      }
      feat.membership[i] = it->second;
    }
    if (feat.groups.size() < 2)
    {
      throw InvalidInput("sensitive column '" + feat.name + "' has a single group ('" + feat.groups[0] +
                         "'); at least two are required");
    }
    feats.push_back(std::move(feat));
  }
  if (id_col)
  {
    for (auto const &row : table.rows)
    {
      ids.push_back(row[*id_col]);
    }
  }
  return {Dataset(opt.scale ? scale_minmax(raw) : std::move(raw), std::move(feats)), std::move(feature_columns),
          std::move(ids)};
}

/// Writes points and group labels; column names default to x0.. and the feature names.
inline void write_dataset_csv(std::string const &path, Dataset const &data,
                              std::vector<std::string> const &columns = {})
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw IoError("cannot open '" + path + "' for writing");
  }
  for (std::size_t f = 0; f < data.d(); ++f)
  {
    out << (f ? "," : "") << csv_escape(f < columns.size() ? columns[f] : "x" + std::to_string(f));
  }
  for (auto const &feat : data.features())
  {
    out << ',' << csv_escape(feat.name);
  }
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < data.n(); ++i)
  {
    for (std::size_t f = 0; f < data.d(); ++f)
    {
      auto const res = std::to_chars(buf, buf + sizeof buf, data.points()(i, f));
      out << (f ? "," : "") << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    for (auto const &feat : data.features())
    {
      out << ',' << csv_escape(feat.groups[static_cast<std::size_t>(feat.membership[i])]);
    }
    out << '\n';
  }
  if (!out)
  {
    throw IoError("write to '" + path + "' failed");
  }
}

inline void write_labels_csv(std::string const &path, std::span<Label const> labels)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << "index,cluster\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
  {
    out << i << ',' << labels[i] << '\n';
  }
  if (!out)
  {
    throw IoError("write to '" + path + "' failed");
  }
}

inline std::vector<Label> read_labels_csv(std::string const &path, std::size_t n)
{
  auto const table = read_csv(path);
  if (table.header.size() != 2)
  {
    throw InvalidInput("labels file '" + path + "' must have two columns (index, cluster)");
  }
  std::vector<Label> labels(n, -1);
  for (std::size_t r = 0; r < table.rows.size(); ++r)
  {
    auto const idx = parse_number(table.rows[r][0]);
    auto const lab = parse_number(table.rows[r][1]);
    if (!idx || !lab || *idx < 0 || *idx >= static_cast<double>(n) || *lab < 0 || std::floor(*idx) != *idx ||
        std::floor(*lab) != *lab)
    {
      throw InvalidInput("line " + std::to_string(table.line_numbers[r]) + ": invalid index/cluster pair");
    }
    labels[static_cast<std::size_t>(*idx)] = static_cast<Label>(*lab);
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    if (labels[i] < 0)
    {
      throw InvalidInput("labels file '" + path + "' has no entry for object " + std::to_string(i));
    }
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Command-line value lists

/// "0-99" (inclusive range) or "3,5,8".
inline std::vector<std::uint64_t> parse_seed_list(std::string_view text)
{
  auto to_u64 = [&](std::string_view part) {
    std::uint64_t v   = 0;
    auto          res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || res.ec != std::errc{} || res.ptr != part.data() + part.size())
    {
      throw InvalidInput("invalid seed '" + std::string(part) + "' in '" + std::string(text) + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> out;
  if (auto dash = text.find('-'); dash != std::string_view::npos && text.find(',') == std::string_view::npos)
  {
    auto const lo = to_u64(text.substr(0, dash));
    auto const hi = to_u64(text.substr(dash + 1));
    if (hi < lo || hi - lo >= 1'000'000)
    {
      throw InvalidInput("invalid seed range '" + std::string(text) + "'");
    }
    for (auto s = lo; s <= hi; ++s)
    {
      out.push_back(s);
    }
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size())
  {
    auto end = text.find(',', start);
    if (end == std::string_view::npos)
    {
      end = text.size();
    }
    out.push_back(to_u64(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

/// Comma-separated fractions or decimals, e.g. "1/2,0.75".
inline std::vector<Rational> parse_rational_list(std::string_view text)
{
  std::vector<Rational> out;
  std::size_t           start = 0;
  while (start <= text.size())
  {
    auto end = text.find(',', start);
    if (end == std::string_view::npos)
    {
      end = text.size();
    }
    out.push_back(Rational::parse(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

enum class SyntheticKind
{
  A,  // one isotropic Gaussian, groups assigned round-robin
  B   // one Gaussian per group, means on a regular polygon 6 sigma apart
};

struct SyntheticOptions
{
  SyntheticKind kind{SyntheticKind::A};
  std::size_t   n{21};
  std::size_t   d{2};
  std::size_t   groups{3};
  std::uint64_t seed{0};
  double        sigma{1.0};
  double        separation{6.0};  // in units of sigma, distance between neighbouring means
};

/// Raw (unscaled) points and round-robin group labels.
inline Dataset gen_synthetic(SyntheticOptions const &opt)
{
  if (opt.groups < 2)
  {
    throw InvalidInput("synthetic data needs at least two groups");
  }
  if (opt.n < opt.groups || opt.d == 0)
  {
    throw InvalidInput("synthetic data needs n >= groups and d >= 1");
  }
  Rng    rng = make_rng(opt.seed);
  Matrix pts(opt.n, opt.d);

  std::vector<std::vector<double>> means(opt.groups, std::vector<double>(opt.d, 0.0));
  if (opt.kind == SyntheticKind::B)
  {
    double const side = opt.separation * opt.sigma;
    for (std::size_t g = 0; g < opt.groups; ++g)
    {
      if (opt.d == 1)
      {
        means[g][0] = side * static_cast<double>(g);
        continue;
      }
      double const radius = side / (2.0 * std::sin(std::numbers::pi / static_cast<double>(opt.groups)));
      double const angle  = 2.0 * std::numbers::pi * static_cast<double>(g) / static_cast<double>(opt.groups);
      means[g][0]         = radius * std::cos(angle);
      means[g][1]         = radius * std::sin(angle);
    }
  }

  SensitiveFeature feat;
  feat.name = "group";
  for (std::size_t g = 0; g < opt.groups; ++g)
  {
    feat.groups.push_back("g" + std::to_string(g));
  }
  feat.membership.resize(opt.n);
  for (std::size_t i = 0; i < opt.n; ++i)
  {
    auto const g       = i % opt.groups;
    feat.membership[i] = static_cast<std::int32_t>(g);
    for (std::size_t f = 0; f < opt.d; ++f)
    {
      pts(i, f) = means[g][f] + opt.sigma * standard_normal(rng);
    }
  }
  return Dataset(std::move(pts), {std::move(feat)});
}

// ---------------------------------------------------------------------------
// Hashing and batch cache

inline std::uint64_t fnv1a(void const *bytes, std::size_t len, std::uint64_t h = 1469598103934665603ULL)
{
  auto const *p = static_cast<unsigned char const *>(bytes);
  for (std::size_t i = 0; i < len; ++i)
  {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

/// Content hash over shape, point values and group labels.
inline std::uint64_t dataset_hash(Dataset const &data)
{
  std::uint64_t h     = 1469598103934665603ULL;
  std::uint64_t shape[2] = {data.n(), data.d()};
  h                   = fnv1a(shape, sizeof shape, h);
  h = fnv1a(data.points().data().data(), data.points().data().size() * sizeof(double), h);
  for (auto const &feat : data.features())
  {
    h = fnv1a(feat.membership.data(), feat.membership.size() * sizeof(feat.membership[0]), h);
  }
  return h;
}

inline std::string hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Cache document: {"schema_version", "dataset_hash", "r", "seed", "membership"}.
/// Representatives and weights are rebuilt from the membership on load.
inline void save_batch_cache(std::string const &path, Dataset const &data, BatchSet const &batches,
                             std::uint64_t seed)
{
  nlohmann::json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["dataset_hash"]   = hex64(dataset_hash(data));
  doc["r"]              = batches.r();
  doc["seed"]           = seed;
  doc["membership"]     = batches.membership;
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << doc.dump() << '\n';
}

/// The cached batch set, or nullopt when the file is missing or was built for
/// another dataset, r or seed.
inline std::optional<BatchSet> load_batch_cache(std::string const &path, Dataset const &data, std::size_t r,
                                                std::uint64_t seed)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    return std::nullopt;
  }
  nlohmann::json doc;
  try
  {
    in >> doc;
  }
  catch (nlohmann::json::exception const &e)
  {
    throw IoError("batch cache '" + path + "' is not valid JSON: " + e.what());
  }
  if (doc.value("schema_version", 0) != kSchemaVersion || doc.value("dataset_hash", "") != hex64(dataset_hash(data)) ||
      doc.value("r", std::size_t{0}) != r || doc.value("seed", std::uint64_t{0}) != seed)
  {
    return std::nullopt;
  }
  return assemble_batches(data, doc.at("membership").get<std::vector<std::int32_t>>(), r);
}

// ---------------------------------------------------------------------------
// Experiment records

struct ExperimentRecord
{
  std::string                         dataset;
  std::string                         algorithm;
  std::size_t                         k{0};
  std::optional<Rational>             lambda;
  std::vector<Rational>               explicit_targets;
  std::vector<Rational>               resolved_targets;
  double                              best_cost{0.0};
  std::uint64_t                       best_seed{0};
  std::vector<std::optional<double>>  per_seed_costs;  // nullopt = run failed
  std::vector<std::uint64_t>          seeds;
  std::vector<Rational>               balances;
  double                              total_seconds{0.0};
  std::vector<double>                 run_seconds;
  double                              batching_seconds{0.0};
  std::size_t                         iterations{0};
  std::int64_t                        epsilon_total{0};
  std::optional<double>               gap_percent;
  std::vector<std::string>            warnings;
};

inline ExperimentRecord make_record(std::string dataset, RunConfig const &config, FairnessSpec const &spec,
                                    MultiRunResult const &res)
{
  ExperimentRecord rec;
  rec.dataset   = std::move(dataset);
  rec.algorithm = std::string(algorithm_name(config.algorithm));
  rec.k         = config.k;
  if (spec.mode == FairnessSpec::Mode::Tolerance)
  {
    rec.lambda = spec.lambda;
  }
  else
  {
    rec.explicit_targets = spec.explicit_targets;
  }
  rec.resolved_targets = res.targets;
  rec.best_cost        = res.best.cost;
  rec.best_seed        = res.best.seed;
  for (auto const &run : res.runs)
  {
    rec.seeds.push_back(run.seed);
    rec.per_seed_costs.push_back(run.feasible ? std::optional<double>(run.cost) : std::nullopt);
    rec.run_seconds.push_back(run.elapsed);
  }
  rec.balances         = res.best.balances;
  rec.total_seconds    = res.total_seconds;
  rec.batching_seconds = res.batching_seconds;
  rec.iterations       = res.best.iterations;
  rec.epsilon_total    = res.best.epsilon_adjustments;
  rec.warnings         = res.warnings;
  return rec;
}

inline double gap_percent(double cost, double baseline)
{
  return 100.0 * (cost / baseline - 1.0);
}

/// Fills gap_percent of every record from the record of `baseline_algorithm`
/// with the same dataset, k and fairness setting.
inline void apply_baseline(std::vector<ExperimentRecord> &records, std::string const &baseline_algorithm)
{
  auto same_instance = [](ExperimentRecord const &a, ExperimentRecord const &b) {
    return a.dataset == b.dataset && a.k == b.k && a.lambda == b.lambda && a.explicit_targets == b.explicit_targets;
  };
  for (auto &rec : records)
  {
    for (auto const &base : records)
    {
      if (base.algorithm == baseline_algorithm && same_instance(rec, base) && base.best_cost > 0.0)
      {
        rec.gap_percent = gap_percent(rec.best_cost, base.best_cost);
        break;
      }
    }
  }
}

inline double round_to(double v, int decimals)
{
  double const scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

inline std::string fixed(double v, int decimals)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline nlohmann::json record_json(ExperimentRecord const &r)
{
  using nlohmann::json;
  json j = json::object();
  j["dataset"]   = r.dataset;
  j["algorithm"] = r.algorithm;
  j["k"]         = r.k;
  j["lambda"]    = r.lambda ? json(r.lambda->str()) : json(nullptr);
  json ex        = json::array();
  for (auto const &t : r.explicit_targets)
  {
    ex.push_back(t.str());
  }
  j["explicit_targets"] = ex;
  json rt              = json::array();
  json rtv             = json::array();
  for (auto const &t : r.resolved_targets)
  {
    rt.push_back(t.str());
    rtv.push_back(round_to(t.to_double(), 3));
  }
  j["resolved_targets"]       = rt;
  j["resolved_targets_value"] = rtv;
  j["best_cost"]              = round_to(r.best_cost, 3);
  j["best_seed"]              = r.best_seed;
  json costs                  = json::array();
  for (auto const &c : r.per_seed_costs)
  {
    costs.push_back(c ? json(round_to(*c, 3)) : json(nullptr));
  }
  j["seeds"]          = r.seeds;
  j["per_seed_costs"] = costs;
  json bal            = json::array();
  for (auto const &b : r.balances)
  {
    bal.push_back(round_to(b.to_double(), 3));
  }
  j["balances"]      = bal;
  j["total_seconds"] = round_to(r.total_seconds, 2);
  json secs          = json::array();
  for (auto s : r.run_seconds)
  {
    secs.push_back(round_to(s, 2));
  }
  j["run_seconds"]      = secs;
  j["batching_seconds"] = round_to(r.batching_seconds, 2);
  j["iterations"]       = r.iterations;
  j["epsilon_total"]    = r.epsilon_total;
  j["gap_percent"]      = r.gap_percent ? json(round_to(*r.gap_percent, 2)) : json(nullptr);
  j["warnings"]         = r.warnings;
  return j;
}

enum class ResultFormat
{
  Json,
  Csv
};

inline std::string render_results(std::vector<ExperimentRecord> const &records, ResultFormat format)
{
  if (records.empty())
  {
    throw InvalidInput("no records to emit");
  }
  if (format == ResultFormat::Json)
  {
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["records"]        = nlohmann::json::array();
    for (auto const &r : records)
    {
      doc["records"].push_back(record_json(r));
    }
    return doc.dump(2) + "\n";
  }
  auto join = [](auto const &items, auto &&fmt) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i)
    {
      s += (i ? ";" : "") + fmt(items[i]);
    }
    return s;
  };
  std::ostringstream out;
  out << "schema_version,dataset,algorithm,k,lambda,explicit_targets,resolved_targets,best_cost,best_seed,"
         "balances,total_seconds,batching_seconds,iterations,epsilon_total,gap_percent,per_seed_costs\n";
  for (auto const &r : records)
  {
    out << kSchemaVersion << ',' << csv_escape(r.dataset) << ',' << r.algorithm << ',' << r.k << ','
        << (r.lambda ? r.lambda->str() : "") << ','
        << join(r.explicit_targets, [](Rational const &t) { return t.str(); }) << ','
        << join(r.resolved_targets, [](Rational const &t) { return t.str(); }) << ',' << fixed(r.best_cost, 3) << ','
        << r.best_seed << ',' << join(r.balances, [](Rational const &b) { return fixed(b.to_double(), 3); }) << ','
        << fixed(r.total_seconds, 2) << ',' << fixed(r.batching_seconds, 2) << ',' << r.iterations << ','
        << r.epsilon_total << ',' << (r.gap_percent ? fixed(*r.gap_percent, 2) : "") << ','
        << join(r.per_seed_costs,
                [](std::optional<double> const &c) { return c ? fixed(*c, 3) : std::string("NA"); })
        << '\n';
  }
  return out.str();
}

inline void emit_results(std::string const &path, std::vector<ExperimentRecord> const &records, ResultFormat format)
{
  auto const text = render_results(records, format);
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
  {
    throw IoError("cannot write results to '" + path + "'");
  }
}

/// One multi-seed run per lambda, in the order given.
inline std::vector<ExperimentRecord> sweep_tradeoff(Dataset const &data, std::string const &dataset_id,
                                                    RunConfig const &config, std::vector<Rational> const &lambdas,
                                                    BatchSet const *batches = nullptr)
{
  std::optional<BatchSet> own;
  double                  batching = 0.0;
  if (config.algorithm == Algorithm::Smpfc && batches == nullptr)
  {
    auto const t0  = detail::Clock::now();
    Rng        rng = make_rng(config.batch_seed, 1);
    own            = build_batches(data, config.r, rng, config.batching);
    batches        = &*own;
    batching       = detail::seconds_since(t0);
  }
  std::vector<ExperimentRecord> out;
  for (auto const &lambda : lambdas)
  {
    auto const spec = FairnessSpec::tolerance(lambda);
    auto       res  = run_multi(data, config, spec, batches);
    res.batching_seconds = batching;
    out.push_back(make_record(dataset_id, config, spec, res));
  }
  return out;
}

}  // namespace fairkm
