// Command-line front end. Talks to the core exclusively through the C API
// in dpep.h; CLI11 and nlohmann/json are header-only helpers used to turn
// flags and config files into the JSON the library consumes.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpep.h"

namespace {

using nlohmann::json;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void fail_api(const std::string& what) {
  throw CliError(what + ": " + dpep_last_error());
}

struct ConfigDeleter {
  void operator()(dpep_config* c) const { dpep_config_free(c); }
};
struct TableDeleter {
  void operator()(dpep_table* t) const { dpep_table_free(t); }
};
using ConfigPtr = std::unique_ptr<dpep_config, ConfigDeleter>;
using TablePtr = std::unique_ptr<dpep_table, TableDeleter>;

ConfigPtr parse_config(const json& j) {
  dpep_config* c = nullptr;
  if (dpep_config_parse(j.dump().c_str(), &c) != DPEP_OK)
    fail_api("invalid configuration");
  return ConfigPtr(c);
}

// Flag values shared by all subcommands. Empty string / NaN means "not
// given"; every given flag overrides the corresponding config-file key.
struct Options {
  std::string config_path;
  std::string method, alpha, criterion, init, matrix_mode, label;
  std::string lambda_grid, methods, matrix_modes;
  int K = -1, jobs = 1, verify_instances = -1, oracle_grid_points = -1;
  double lambda = std::nan("");
  double mu = std::nan(""), L = std::nan(""), R = std::nan("");
  double D = std::nan(""), solver_tol = std::nan("");
  double star_gradient_bound = std::nan("");
  long long seed = -1;
  std::string out_path, svg_path, svg_scale = "linear";
};

void add_common_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON config file; flags override its keys");
  cmd->add_option("--method", o.method, "dgd | diging | extra");
  cmd->add_option("--K", o.K, "number of iterations");
  cmd->add_option("--alpha", o.alpha, "step size, or 'optimize'");
  cmd->add_option("--mu", o.mu, "strong convexity modulus (smooth class)");
  cmd->add_option("--L", o.L, "smoothness constant (smooth class)");
  cmd->add_option("--R", o.R, "subgradient bound (bounded-gradient class)");
  cmd->add_option("--D", o.D, "initial distance bound");
  cmd->add_option("--criterion", o.criterion, "fval-gap | msd");
  cmd->add_option("--init", o.init, "consensus | msd");
  cmd->add_option("--matrix-mode", o.matrix_mode, "constant | time-varying");
  cmd->add_option("--lambda-grid", o.lambda_grid, "comma-separated grid, e.g. 0,0.3,0.6,0.9");
  cmd->add_option("--star-gradient-bound", o.star_gradient_bound,
                  "bound on the optimum's gradient disagreement (smooth class)");
  cmd->add_option("--seed", o.seed, "seed for sampled instances");
  cmd->add_option("--label", o.label, "column label in merged tables");
  cmd->add_option("--solver-tol", o.solver_tol,
                  "solver feasibility and gap tolerance (env DPEP_SOLVER_TOL)");
  cmd->add_option("--jobs", o.jobs, "worker count; accepted for script compatibility, execution is serial")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out_path, "CSV output path (default stdout)");
  cmd->add_option("--svg", o.svg_path, "optional SVG line chart of bound vs lambda");
  cmd->add_option("--svg-scale", o.svg_scale, "y axis: linear | log | log-shift1")
      ->check(CLI::IsMember({"linear", "log", "log-shift1"}));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json base_config(const Options& o) {
  json j = json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw CliError("cannot open config file: " + o.config_path);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CliError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CliError("config file must hold a JSON object");
  }
  if (!o.method.empty()) j["method"] = o.method;
  if (o.K >= 0) j["K"] = o.K;
  if (!o.alpha.empty()) {
    if (o.alpha == "optimize") j["alpha"] = "optimize";
    else {
      try {
        std::size_t used = 0;
        const double a = std::stod(o.alpha, &used);
        if (used != o.alpha.size()) throw std::invalid_argument(o.alpha);
        j["alpha"] = a;
      } catch (const std::exception&) {
        throw CliError("--alpha must be a number or 'optimize'");
      }
    }
  }
  if (!std::isnan(o.mu)) j["mu"] = o.mu;
  if (!std::isnan(o.L)) j["L"] = o.L;
  if (!std::isnan(o.R)) j["R"] = o.R;
  if (!std::isnan(o.D)) j["D"] = o.D;
  if (!o.criterion.empty()) j["criterion"] = o.criterion;
  if (!o.init.empty()) j["init"] = o.init;
  if (!o.matrix_mode.empty()) j["matrix_mode"] = o.matrix_mode;
  if (!o.label.empty()) j["label"] = o.label;
  if (o.seed >= 0) j["seed"] = o.seed;
  if (o.verify_instances >= 0) j["verify_instances"] = o.verify_instances;
  if (o.oracle_grid_points >= 0) j["oracle_grid_points"] = o.oracle_grid_points;
  if (!std::isnan(o.star_gradient_bound))
    j["star_gradient_bound"] = o.star_gradient_bound;
  if (!o.lambda_grid.empty()) {
    json grid = json::array();
    for (const auto& tok : split_list(o.lambda_grid)) {
      try {
        grid.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw CliError("--lambda-grid entries must be numbers: " + tok);
      }
    }
    j["lambda_grid"] = grid;
  }
  double tol = o.solver_tol;
  if (std::isnan(tol)) {
    if (const char* env = std::getenv("DPEP_SOLVER_TOL")) {
      try {
        tol = std::stod(env);
      } catch (const std::exception&) {
        throw CliError("DPEP_SOLVER_TOL must be a number");
      }
    }
  }
  if (!std::isnan(tol)) {
    j["solver"]["feas_tol"] = tol;
    j["solver"]["gap_tol"] = tol;
  }
  return j;
}

// ---- table plumbing ----

struct TableData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

TableData read_table(const dpep_table* t) {
  TableData d;
  const std::size_t rows = dpep_table_rows(t), cols = dpep_table_cols(t);
  for (std::size_t c = 0; c < cols; ++c) d.header.push_back(dpep_table_header(t, c));
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::string> row;
    for (std::size_t c = 0; c < cols; ++c) row.push_back(dpep_table_cell(t, r, c));
    d.rows.push_back(std::move(row));
  }
  return d;
}

void write_csv(const dpep_table* t, const std::string& path) {
  char* csv = nullptr;
  if (dpep_table_csv(t, &csv) != DPEP_OK) fail_api("CSV rendering failed");
  const std::string text = csv;
  dpep_string_free(csv);
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError("cannot open output file: " + path);
  out << text;
}

// ---- SVG rendering (pure presentation; the CSV is the contract) ----

double apply_scale(double y, const std::string& scale) {
  if (scale == "log") return std::log10(std::max(y, 1e-300));
  if (scale == "log-shift1") return std::log10(1.0 + std::max(y, 0.0));
  return y;
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Plots every named y column against the x column as one polyline each.
void write_svg(const TableData& t, const std::string& x_col,
               const std::vector<std::string>& y_cols,
               const std::string& scale, const std::string& path) {
  const auto col_index = [&](const std::string& name) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw CliError("no column named " + name);
    return static_cast<std::size_t>(it - t.header.begin());
  };
  const std::size_t xi = col_index(x_col);
  std::vector<std::size_t> yis;
  for (const auto& name : y_cols) yis.push_back(col_index(name));

  struct Series {
    std::string name;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (std::size_t yi : yis) {
    Series s{t.header[yi], {}};
    for (const auto& row : t.rows) {
      try {
        const double x = std::stod(row[xi]);
        const double y = apply_scale(std::stod(row[yi]), scale);
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        s.pts.emplace_back(x, y);
        xmin = std::min(xmin, x), xmax = std::max(xmax, x);
        ymin = std::min(ymin, y), ymax = std::max(ymax, y);
      } catch (const std::exception&) {
        // failed rows carry non-numeric cells; skip them in the plot
      }
    }
    series.push_back(std::move(s));
  }
  if (xmin > xmax || ymin > ymax) throw CliError("nothing to plot");
  if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;

  const double W = 640, H = 420, ml = 70, mr = 20, mt = 20, mb = 50;
  const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  const auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
      << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = xmin + (xmax - xmin) * i / 4.0;
    const double y = ymin + (ymax - ymin) * i / 4.0;
    svg << "<text x=\"" << px(x) << "\" y=\"" << H - mb + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_num(x)
        << "</text>\n"
        << "<text x=\"" << ml - 6 << "\" y=\"" << py(y) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_num(y)
        << "</text>\n";
  }
  const std::string ylabel =
      scale == "log" ? "log10(bound)"
                     : (scale == "log-shift1" ? "log10(1 + bound)" : "bound");
  svg << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">" << x_col << "</text>\n"
      << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (mt + H - mb) / 2 << ")\">" << ylabel << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[s].pts) svg << px(x) << "," << py(y) << " ";
    svg << "\"/>\n"
        << "<text x=\"" << W - mr - 6 << "\" y=\"" << mt + 16 + 16 * s
        << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << color << "\">"
        << series[s].name << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError("cannot open SVG file: " + path);
  out << svg.str();
}

// ---- subcommands ----

int cmd_sweep(const Options& o) {
  const auto cfg = parse_config(base_config(o));
  dpep_table* raw = nullptr;
  int all_ok = 0;
  if (dpep_run_sweep(cfg.get(), &raw, &all_ok) != DPEP_OK) fail_api("sweep failed");
  TablePtr table(raw);
  write_csv(table.get(), o.out_path);
  if (!o.svg_path.empty())
    write_svg(read_table(table.get()), "lambda", {"bound"}, o.svg_scale, o.svg_path);
  if (!all_ok) std::cerr << "warning: some grid points failed to solve\n";
  return all_ok ? 0 : 1;
}

int cmd_optimize_alpha(const Options& o) {
  json j = base_config(o);
  j["alpha"] = "optimize";
  const auto cfg = parse_config(j);
  std::vector<double> lambdas;
  if (!std::isnan(o.lambda)) {
    lambdas.push_back(o.lambda);
  } else if (j.contains("lambda_grid")) {
    for (double l : j["lambda_grid"]) lambdas.push_back(l);
  } else {
    lambdas = {0.0, 0.3, 0.6, 0.9};
  }
  std::ostringstream csv;
  csv << "lambda,alpha_star,bound\n";
  bool any_failed = false;
  for (double lam : lambdas) {
    double alpha = 0.0, bound = 0.0;
    if (dpep_optimize_alpha(cfg.get(), lam, &alpha, &bound) != DPEP_OK) {
      std::cerr << "warning: lambda=" << lam << ": " << dpep_last_error() << "\n";
      csv << fmt_num(lam) << ",,\n";
      any_failed = true;
      continue;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n", lam, alpha, bound);
    csv << buf;
  }
  if (o.out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(o.out_path, std::ios::binary);
    if (!out) throw CliError("cannot open output file: " + o.out_path);
    out << csv.str();
  }
  return any_failed ? 1 : 0;
}

int cmd_compare(const Options& o) {
  const json base = base_config(o);
  std::vector<std::string> methods =
      o.methods.empty() ? std::vector<std::string>{} : split_list(o.methods);
  std::vector<std::string> modes = o.matrix_modes.empty()
                                       ? std::vector<std::string>{}
                                       : split_list(o.matrix_modes);
  if (methods.empty())
    throw CliError("compare needs --methods, e.g. --methods diging,extra");
  if (modes.empty())
    modes.push_back(base.contains("matrix_mode")
                        ? base["matrix_mode"].get<std::string>()
                        : std::string("constant"));
  std::vector<ConfigPtr> configs;
  for (const auto& m : methods)
    for (const auto& mode : modes) {
      json j = base;
      j["method"] = m;
      j["matrix_mode"] = mode;
      j.erase("label");  // let each column label itself method-mode
      configs.push_back(parse_config(j));
    }
  std::vector<const dpep_config*> raw_configs;
  for (const auto& c : configs) raw_configs.push_back(c.get());

  dpep_table* raw = nullptr;
  int all_ok = 0;
  if (dpep_compare(raw_configs.data(), raw_configs.size(), &raw, &all_ok) !=
      DPEP_OK)
    fail_api("compare failed");
  TablePtr table(raw);
  write_csv(table.get(), o.out_path);
  if (!o.svg_path.empty()) {
    const TableData data = read_table(table.get());
    std::vector<std::string> y_cols(data.header.begin() + 1, data.header.end());
    write_svg(data, "lambda", y_cols, o.svg_scale, o.svg_path);
  }
  if (!all_ok) std::cerr << "warning: some grid points failed to solve\n";
  return all_ok ? 0 : 1;
}

int cmd_verify(const Options& o) {
  const auto cfg = parse_config(base_config(o));
  dpep_table* raw = nullptr;
  int all_pass = 0;
  if (dpep_verify(cfg.get(), &raw, &all_pass) != DPEP_OK) fail_api("verify failed");
  TablePtr table(raw);
  write_csv(table.get(), o.out_path);
  if (!all_pass) std::cerr << "verification FAILED\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case performance bounds for decentralized first-order "
               "methods (version " +
               std::string(dpep_version()) + ")"};
  app.require_subcommand(1);
  Options o;

  auto* sweep = app.add_subcommand("sweep", "one spectral bound per lambda grid point");
  add_common_flags(sweep, o);

  auto* opt = app.add_subcommand("optimize-alpha", "step-size search per lambda");
  add_common_flags(opt, o);
  opt->add_option("--lambda", o.lambda, "single lambda (default: the grid)");

  auto* cmp = app.add_subcommand("compare", "merged bounds, one column per method/mode");
  add_common_flags(cmp, o);
  cmp->add_option("--methods", o.methods, "comma-separated methods to compare");
  cmp->add_option("--matrix-modes", o.matrix_modes,
                  "comma-separated modes (constant, time-varying)");

  auto* verify = app.add_subcommand("verify", "oracle and simulation soundness checks");
  add_common_flags(verify, o);
  verify->add_option("--verify-instances", o.verify_instances,
                     "sampled instances per lambda");
  verify->add_option("--oracle-grid-points", o.oracle_grid_points,
                     "lambda2 grid size for the oracle");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return cmd_sweep(o);
    if (opt->parsed()) return cmd_optimize_alpha(o);
    if (cmp->parsed()) return cmd_compare(o);
    return cmd_verify(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
