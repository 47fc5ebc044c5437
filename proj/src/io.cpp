#include "ccwnet/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "ccwnet/error.hpp"

namespace ccwnet {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code dir_ec;
    fs::create_directories(path.parent_path(), dir_ec);
    if (dir_ec) throw ConfigError("cannot create " + path.parent_path().string() + ": " + dir_ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

}  // namespace

std::string dataset_to_csv(const Dataset& data) {
  std::string out = "y";
  for (Index j = 0; j < data.dim(); ++j) out += ",x" + std::to_string(j + 1);
  out += '\n';
  for (Index i = 0; i < data.size(); ++i) {
    out += data.label(i) == 1.0 ? '1' : '0';
    for (Index j = 0; j < data.dim(); ++j) {
      out += ',';
      append_double(out, data.x()(i, j));
    }
    out += '\n';
  }
  return out;
}

Dataset dataset_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(trim(field));
  }
  if (header.size() < 2 || header[0] != "y") throw ConfigError("dataset CSV header must be y,x1,...,xp");
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "x" + std::to_string(k)) throw ConfigError("dataset CSV header must be y,x1,...,xp");
  }
  const Index p = static_cast<Index>(header.size() - 1);
  std::vector<double> values;
  std::vector<double> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Index k = 0;
    while (std::getline(ss, field, ',')) {
      char* end = nullptr;
      const std::string cell = trim(field);
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0') {
        throw ConfigError("dataset CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      (k == 0 ? labels : values).push_back(v);
      ++k;
    }
    if (k != p + 1) throw ConfigError("dataset CSV line " + std::to_string(line_no) + ": wrong field count");
  }
  const Index n = static_cast<Index>(labels.size());
  if (n == 0) return Dataset(p);
  Eigen::MatrixXd x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, p);
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(labels.data(), n);
  return Dataset(std::move(x), std::move(y));
}

Dataset read_dataset_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return dataset_from_csv(in);
}

Json to_json(const SummarySpec& h) {
  if (h.kind == SummarySpec::Kind::kCoordinate) return Json{{"kind", "coordinate"}, {"j", h.j}};
  return Json{{"kind", "affine"}, {"j", h.j}, {"a", h.a}, {"b", h.b}};
}

SummarySpec summary_spec_from_json(const Json& j) {
  require_object(j, "summary spec");
  try {
    const auto kind = j.at("kind").get<std::string>();
    const auto idx = j.at("j").get<Index>();
    if (kind == "coordinate") return SummarySpec::coordinate(idx);
    if (kind == "affine") return SummarySpec::affine(idx, j.at("a").get<double>(), j.at("b").get<double>());
    throw ConfigError("unknown summary kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("summary spec: ") + e.what());
  }
}

Json to_json(const ExternalSummary& s) {
  Json j{{"h", to_json(s.h)}, {"mu_tilde", s.mu_tilde}};
  if (s.v_ext) j["v_ext"] = *s.v_ext;
  if (s.n_e) j["n_e"] = *s.n_e;
  return j;
}

ExternalSummary external_summary_from_json(const Json& j) {
  require_object(j, "external summary");
  try {
    ExternalSummary s;
    s.h = summary_spec_from_json(j.at("h"));
    s.mu_tilde = j.at("mu_tilde").get<double>();
    if (j.contains("v_ext") && !j.at("v_ext").is_null()) s.v_ext = j.at("v_ext").get<double>();
    if (j.contains("n_e") && !j.at("n_e").is_null()) s.n_e = j.at("n_e").get<Index>();
    s.validate();
    return s;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("external summary: ") + e.what());
  }
}

Json to_json(const ProportionEstimate& e) {
  return Json{{"p1_hat", e.p1_hat},
              {"p1_hat_clamped", e.p1_hat_clamped},
              {"clamped", e.clamped},
              {"w1_hat", e.w1_hat},
              {"w0_hat", e.w0_hat},
              {"mu1_hat", e.mu1_hat},
              {"mu0_hat", e.mu0_hat},
              {"mu_tilde", e.mu_tilde},
              {"variance", e.variance},
              {"se", e.se},
              {"ci", {e.ci_lo, e.ci_hi}},
              {"ci_note", e.summary_exact ? "summary treated as exact" : "includes external variance"},
              {"a1", e.a1},
              {"a2", e.a2},
              {"a3", e.a3},
              {"v1", e.v1},
              {"v0", e.v0},
              {"v", e.v},
              {"n", e.n}};
}

Json to_json(const Network& net) {
  const auto& arch = net.architecture();
  Json weights = Json::array();
  Json biases = Json::array();
  for (Index l = 0; l < net.layers(); ++l) {
    Json w = Json::array();
    const auto& m = net.weight(l);
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) w.push_back(m(r, c));
    }
    weights.push_back(std::move(w));
    biases.push_back(Json(std::vector<double>(net.bias(l).data(), net.bias(l).data() + net.bias(l).size())));
  }
  Json j{{"arch", {{"p", arch.input_dim}, {"depth", arch.depth}, {"width", arch.width}}},
         {"weights", std::move(weights)},
         {"biases", std::move(biases)}};
  if (net.output_clamp()) j["output_clamp"] = *net.output_clamp();
  return j;
}

Network network_from_json(const Json& j) {
  require_object(j, "network");
  try {
    const auto& a = j.at("arch");
    const Architecture arch{a.at("p").get<Index>(), a.at("depth").get<Index>(), a.at("width").get<Index>()};
    Network net(arch);
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (static_cast<Index>(weights.size()) != net.layers() || static_cast<Index>(biases.size()) != net.layers()) {
      throw ConfigError("network layer count does not match its architecture");
    }
    for (Index l = 0; l < net.layers(); ++l) {
      auto& m = net.weight(l);
      const auto w = weights.at(static_cast<std::size_t>(l)).get<std::vector<double>>();
      const auto b = biases.at(static_cast<std::size_t>(l)).get<std::vector<double>>();
      if (static_cast<Index>(w.size()) != m.size() || static_cast<Index>(b.size()) != net.bias(l).size()) {
        throw ConfigError("network layer " + std::to_string(l) + " has the wrong shape");
      }
      for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) m(r, c) = w[static_cast<std::size_t>(r * m.cols() + c)];
      }
      net.bias(l) = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Index>(b.size()));
    }
    if (j.contains("output_clamp")) net.set_output_clamp(j.at("output_clamp").get<double>());
    if (!net.all_finite()) throw ConfigError("network has non-finite parameters");
    return net;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
}

Json to_json(const TrainConfig& c) {
  Json j{{"learning_rate", c.learning_rate},
         {"max_epochs", c.max_epochs},
         {"batch_size", c.batch_size},
         {"early_stop_tol", c.early_stop_tol},
         {"early_stop_patience", c.early_stop_patience},
         {"seed", c.seed}};
  j["output_clamp"] = c.output_clamp ? Json(*c.output_clamp) : Json(nullptr);
  return j;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
  require_object(j, "train config");
  static const std::set<std::string> kKeys{"learning_rate", "max_epochs", "batch_size", "early_stop_tol",
                                           "early_stop_patience", "seed", "output_clamp"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw ConfigError("unknown train config key '" + key + "'");
  }
  try {
    c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
    c.max_epochs = get_or(j, "max_epochs", c.max_epochs);
    c.batch_size = get_or(j, "batch_size", c.batch_size);
    c.early_stop_tol = get_or(j, "early_stop_tol", c.early_stop_tol);
    c.early_stop_patience = get_or(j, "early_stop_patience", c.early_stop_patience);
    c.seed = get_or(j, "seed", c.seed);
    if (j.contains("output_clamp")) {
      c.output_clamp = j.at("output_clamp").is_null() ? std::nullopt
                                                      : std::optional<double>(j.at("output_clamp").get<double>());
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

Json to_json(const GridSpec& g) { return Json{{"depths", g.depths}, {"widths", g.widths}}; }

GridSpec grid_spec_from_json(const Json& j) {
  require_object(j, "grid");
  try {
    GridSpec g;
    g.depths = get_or(j, "depths", g.depths);
    g.widths = get_or(j, "widths", g.widths);
    g.validate();
    return g;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

Json to_json(const FitResult& f) {
  Json history = Json::array();
  for (const auto& h : f.history) history.push_back({h.epoch, h.train_loss, h.monitor_loss});
  Json cells = Json::array();
  for (const auto& c : f.cells) {
    Json cell{{"depth", c.depth}, {"width", c.width}, {"validation_accuracy", c.validation_accuracy},
              {"epochs_run", c.epochs_run}, {"diverged", c.diverged}};
    if (c.diverged) cell["error"] = c.error;
    cells.push_back(std::move(cell));
  }
  return Json{{"weighted", f.weighted},
              {"weights", {f.w1, f.w0}},
              {"depth", f.depth},
              {"width", f.width},
              {"validation_accuracy", f.validation_accuracy},
              {"cells", std::move(cells)},
              {"history", std::move(history)},
              {"network", to_json(f.network)}};
}

FitResult fit_result_from_json(const Json& j) {
  require_object(j, "fit result");
  try {
    FitResult f;
    f.network = network_from_json(j.at("network"));
    f.weighted = get_or(j, "weighted", false);
    if (j.contains("weights")) {
      f.w1 = j.at("weights").at(0).get<double>();
      f.w0 = j.at("weights").at(1).get<double>();
    }
    f.depth = f.network.architecture().depth;
    f.width = f.network.architecture().width;
    f.validation_accuracy = get_or(j, "validation_accuracy", 0.0);
    if (j.contains("history")) {
      for (const auto& h : j.at("history")) {
        f.history.push_back({h.at(0).get<Index>(), h.at(1).get<double>(), h.at(2).get<double>()});
      }
    }
    return f;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("fit result: ") + e.what());
  }
}

Json to_json(const Scenario& s) {
  return Json{{"name", s.name},
              {"g", s.function().name()},
              {"n1", s.n1},
              {"n0", s.n0},
              {"n_e", s.n_e},
              {"h", to_json(s.h)},
              {"split", {s.train_fraction, s.validation_fraction, s.test_fraction}},
              {"grid", to_json(s.grid)},
              {"train_config", to_json(s.train_config)},
              {"replications", s.replications},
              {"master_seed", s.master_seed},
              {"fast_path", s.fast_path},
              {"epsilon", s.epsilon},
              {"eval_grid_points", s.eval_grid_points},
              {"oracle_draws", s.oracle_draws}};
}

Scenario scenario_from_json(const Json& j) {
  require_object(j, "scenario");
  static const std::set<std::string> kKeys{"name", "g", "n1", "n0", "n_e", "h", "split", "grid", "train_config",
                                           "replications", "master_seed", "fast_path", "epsilon",
                                           "eval_grid_points", "oracle_draws"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw ConfigError("unknown scenario key '" + key + "'");
  }
  try {
    const auto g = GFunction::from_name(j.at("g").get<std::string>());
    Scenario s = Scenario::for_function(g.tag(), get_or<Index>(j, "n1", 500), get_or<Index>(j, "n0", 500));
    s.name = get_or(j, "name", s.name);
    s.n_e = get_or(j, "n_e", s.n_e);
    if (j.contains("h")) s.h = summary_spec_from_json(j.at("h"));
    if (j.contains("split")) {
      const auto f = j.at("split").get<std::vector<double>>();
      if (f.size() != 3) throw ConfigError("split must list three fractions");
      s.train_fraction = f[0];
      s.validation_fraction = f[1];
      s.test_fraction = f[2];
    }
    if (j.contains("grid")) s.grid = grid_spec_from_json(j.at("grid"));
    if (j.contains("train_config")) s.train_config = train_config_from_json(j.at("train_config"), s.train_config);
    s.replications = get_or(j, "replications", s.replications);
    s.master_seed = get_or(j, "master_seed", s.master_seed);
    s.fast_path = get_or(j, "fast_path", s.fast_path);
    s.epsilon = get_or(j, "epsilon", s.epsilon);
    s.eval_grid_points = get_or(j, "eval_grid_points", s.eval_grid_points);
    s.oracle_draws = get_or(j, "oracle_draws", s.oracle_draws);
    return s;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

namespace {

Json to_json(const MetricSummary& m) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json{{"mean", num(m.mean)}, {"sd", num(m.sd)}, {"median", num(m.median)}};
}

}  // namespace

Json to_json(const ReplicationSummary& s) {
  Json j{{"scenario", to_json(s.scenario)},
         {"true_p1", s.true_p1},
         {"true_p1_se", s.true_p1_se},
         {"replications", s.replications},
         {"succeeded", s.succeeded},
         {"failed", s.failed},
         {"coverage", s.coverage},
         {"p1_hat", to_json(s.p1_hat)},
         {"se", to_json(s.se)}};
  if (!s.scenario.fast_path) {
    j["re_weighted"] = to_json(s.re_weighted);
    j["re_unweighted"] = to_json(s.re_unweighted);
    j["gamma_shift"] = to_json(s.gamma_shift);
  }
  Json failures = Json::array();
  for (const auto& r : s.replicates) {
    if (!r.ok) failures.push_back({{"index", r.index}, {"error", r.error}});
  }
  j["failures"] = std::move(failures);
  return j;
}

std::string replicates_to_csv(const std::vector<ReplicationResult>& results) {
  std::string out =
      "index,ok,p1_hat,se,ci_lo,ci_hi,covered,clamped,w1,w0,re_weighted,re_unweighted,gamma_shift,"
      "depth_weighted,width_weighted,depth_unweighted,width_unweighted,runtime_seconds,error\n";
  for (const auto& r : results) {
    out += std::to_string(r.index) + ',' + (r.ok ? "1" : "0");
    for (double v : {r.p1_hat, r.se, r.ci_lo, r.ci_hi}) {
      out += ',';
      append_double(out, v);
    }
    out += std::string(",") + (r.covered ? "1" : "0") + ',' + (r.clamped ? "1" : "0");
    for (double v : {r.w1, r.w0, r.re_weighted, r.re_unweighted, r.gamma_shift}) {
      out += ',';
      if (std::isfinite(v)) append_double(out, v);
    }
    for (Index v : {r.depth_weighted, r.width_weighted, r.depth_unweighted, r.width_unweighted}) {
      out += ',' + std::to_string(v);
    }
    out += ',';
    append_double(out, r.runtime_seconds);
    std::string err = r.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out += ',' + err + '\n';
  }
  return out;
}

Schema schema_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("schema must be a JSON array of columns");
  Schema schema;
  try {
    for (const auto& c : j) {
      ColumnSchema col;
      col.name = c.at("name").get<std::string>();
      const auto kind = c.at("kind").get<std::string>();
      if (kind == "continuous") col.kind = ColumnSchema::Kind::kContinuous;
      else if (kind == "numeric") col.kind = ColumnSchema::Kind::kNumeric;
      else if (kind == "categorical") col.kind = ColumnSchema::Kind::kCategorical;
      else if (kind == "label") col.kind = ColumnSchema::Kind::kLabel;
      else if (kind == "drop") col.kind = ColumnSchema::Kind::kDrop;
      else throw ConfigError("unknown column kind '" + kind + "' for '" + col.name + "'");
      if (c.contains("categories")) col.categories = c.at("categories").get<std::vector<std::string>>();
      if (c.contains("consolidate")) {
        col.consolidate_from = c.at("consolidate").at("from").get<std::vector<std::string>>();
        col.consolidate_to = c.at("consolidate").at("to").get<std::string>();
      }
      if (c.contains("positive")) col.positive = c.at("positive").get<std::vector<std::string>>();
      if (c.contains("missing")) col.missing_token = c.at("missing").get<std::string>();
      schema.push_back(std::move(col));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
  validate_schema(schema);
  return schema;
}

Json to_json(const PreprocessReport& r) {
  Json columns = Json::array();
  for (std::size_t k = 0; k < r.columns.size(); ++k) {
    const auto& c = r.columns[k];
    columns.push_back({{"column", "x" + std::to_string(k + 1)}, {"name", c.name}, {"source", c.source},
                       {"encoding", c.encoding}});
  }
  Json standardization = Json::array();
  for (const auto& s : r.standardization) {
    standardization.push_back({{"column", s.column}, {"mean", s.mean}, {"sd", s.sd}});
  }
  return Json{{"rows_in", r.rows_in},
              {"rows_out", r.rows_out},
              {"rows_dropped_missing", r.rows_dropped_missing},
              {"case_count", r.case_count},
              {"control_count", r.control_count},
              {"columns", std::move(columns)},
              {"standardization", std::move(standardization)}};
}

}  // namespace ccwnet
