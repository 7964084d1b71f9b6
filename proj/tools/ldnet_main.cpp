// Command-line front end: batch analysis, oracle verification, parameter
// sweeps, fluid paths and Monte Carlo simulation for the two-node models.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ldnet/errors.hpp"
#include "ldnet/fork.hpp"
#include "ldnet/json_io.hpp"
#include "ldnet/ld_solver.hpp"
#include "ldnet/legendre.hpp"
#include "ldnet/sim.hpp"

namespace {

using ldnet::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitUnstable = 2;
constexpr int kExitVerify = 3;
constexpr int kExitInternal = 4;

struct VerifyGap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_input(const std::string& input) {
  std::string text;
  if (!input.empty() && input[0] == '{') {
    text = input;
  } else if (input == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    text = os.str();
  } else {
    std::ifstream f(input);
    if (!f) throw ldnet::InvalidParams("cannot open input file: " + input);
    std::ostringstream os;
    os << f.rdbuf();
    text = os.str();
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ldnet::InvalidParams(std::string("input is not valid JSON: ") + e.what());
  }
}

void write_text(const std::string& output, const std::string& text) {
  if (output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(output);
  if (!f) throw ldnet::InvalidParams("cannot open output file: " + output);
  f << text;
}

std::string sibling_json_path(const std::string& csv_path) {
  const auto dot = csv_path.rfind(".csv");
  if (dot != std::string::npos && dot == csv_path.size() - 4)
    return csv_path.substr(0, dot) + ".json";
  return csv_path + ".json";
}

int parse_splitting(const std::string& s) {
  if (s == "off" || s.empty()) return 0;
  if (s == "on" || s == "fixed") return 64;
  std::string num = s;
  if (num.rfind("fixed:", 0) == 0) num = num.substr(6);
  try {
    const int n = std::stoi(num);
    if (n < 0) throw std::invalid_argument("negative");
    return n;
  } catch (const std::exception&) {
    throw ldnet::InvalidParams("--splitting expects off, on, N or fixed:N");
  }
}

struct ModelAnalysis {
  ldnet::LDAnalysis analysis;
  ldnet::RegimeMGF m_plus;
  ldnet::RegimeMGF m_minus;
  json params_echo;
};

ModelAnalysis analyze_model(const std::string& model, const json& jin) {
  if (model == "jackson-mod") {
    const ldnet::NetworkParams p = ldnet::network_params_from_json(jin);
    return {ldnet::analyze(p),
            ldnet::RegimeMGF(ldnet::interior_jumps(p), ldnet::MgfRole::Interior),
            ldnet::RegimeMGF(ldnet::boundary_jumps(p), ldnet::MgfRole::XBoundary),
            ldnet::to_json(p)};
  }
  if (model == "fork") {
    const ldnet::ForkParams p = ldnet::fork_params_from_json(jin);
    auto [interior, boundary] = ldnet::fork_jumps(p);
    return {ldnet::fork_analyze(p),
            ldnet::RegimeMGF(std::move(interior), ldnet::MgfRole::Interior),
            ldnet::RegimeMGF(std::move(boundary), ldnet::MgfRole::XBoundary),
            ldnet::to_json(p)};
  }
  throw ldnet::InvalidParams("unknown model '" + model + "'");
}

ldnet::CtmcModel sim_model(const std::string& model, const json& jin) {
  if (model == "jackson-mod")
    return ldnet::CtmcModel::jackson(ldnet::network_params_from_json(jin));
  if (model == "fork")
    return ldnet::CtmcModel::fork(ldnet::fork_params_from_json(jin));
  throw ldnet::InvalidParams("unknown model '" + model + "'");
}

std::vector<std::string> analysis_csv_columns(const std::string& model) {
  std::vector<std::string> cols;
  if (model == "jackson-mod")
    cols = {"lambda1_bar", "lambda2_bar", "mu1", "mu2", "mu1_star", "r12", "r21"};
  else
    cols = {"nu", "lambda", "eta", "alpha", "beta"};
  for (const char* c :
       {"status", "regime", "rate", "beta", "h", "rho", "theta_b1", "theta_b2",
        "theta_j1", "theta_j2", "theta_c1", "theta_c2"})
    cols.push_back(c);
  return cols;
}

std::string analysis_csv_row(const std::string& model, const json& params,
                             const std::string& status,
                             const ldnet::LDAnalysis* a) {
  using ldnet::format_double;
  std::ostringstream os;
  for (const std::string& c : analysis_csv_columns(model)) {
    if (params.contains(c)) {
      os << format_double(params.at(c).get<double>()) << ',';
      continue;
    }
    if (c == "status") {
      os << status << ',';
      continue;
    }
    if (a == nullptr) {
      os << ',';
      continue;
    }
    if (c == "regime") os << ldnet::to_string(a->regime);
    else if (c == "rate") os << format_double(a->rate);
    else if (c == "beta") os << format_double(a->beta);
    else if (c == "h") os << format_double(a->cascade_height);
    else if (c == "rho") os << format_double(a->rho);
    else if (c == "theta_b1") os << format_double(a->theta_b[0]);
    else if (c == "theta_b2") os << format_double(a->theta_b[1]);
    else if (c == "theta_j1") os << format_double(a->theta_j[0]);
    else if (c == "theta_j2") os << format_double(a->theta_j[1]);
    else if (c == "theta_c1") os << format_double(a->theta_c[0]);
    else if (c == "theta_c2") os << format_double(a->theta_c[1]);
    os << ',';
  }
  std::string row = os.str();
  row.back() = '\n';
  return row;
}

std::string csv_header(const std::string& model) {
  std::string h;
  for (const std::string& c : analysis_csv_columns(model)) h += c + ',';
  h.back() = '\n';
  return h;
}

// ---- subcommand bodies ----

int cmd_analyze(const std::string& model, const std::string& input,
                const std::string& output, const std::string& format) {
  const json jin = load_input(input);
  const ModelAnalysis ma = analyze_model(model, jin);
  if (format == "csv") {
    write_text(output, csv_header(model) +
                           analysis_csv_row(model, ma.params_echo, "ok",
                                            &ma.analysis));
    return kExitOk;
  }
  json doc = ldnet::to_json(ma.analysis);
  doc["model"] = model;
  doc["params"] = ma.params_echo;
  write_text(output, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_verify(const std::string& model, const std::string& input,
               const std::string& output) {
  const json jin = load_input(input);
  const ModelAnalysis ma = analyze_model(model, jin);
  const ldnet::LDAnalysis& a = ma.analysis;

  const ldnet::InteriorMin mi = ldnet::min_interior_action(ma.m_plus);
  const ldnet::MixtureMin mx = ldnet::min_mixture_action(ma.m_plus, ma.m_minus);
  const ldnet::CascadeMin mc =
      ldnet::min_cascade_action_cost(ma.m_plus, a.y_climb_cost);

  struct Row {
    const char* family;
    double analytic, oracle;
  } rows[] = {{"interior", a.theta_b[0], mi.value},
              {"boundary", a.theta_j[0], mx.value},
              {"cascade", a.theta_c[0], mc.value}};

  std::ostringstream os;
  os << "family    analytic                  oracle                    gap\n";
  bool ok = true;
  for (const Row& r : rows) {
    const double gap = std::abs(r.analytic - r.oracle);
    char line[160];
    std::snprintf(line, sizeof(line), "%-9s %-25.17g %-25.17g %.3g\n", r.family,
                  r.analytic, r.oracle, gap);
    os << line;
    if (!(gap <= 1e-5)) ok = false;
  }
  if (mi.multiplicity_warning || mx.multiplicity_warning)
    os << "warning: oracle found multiple local minima\n";
  write_text(output, os.str());
  if (!ok) throw VerifyGap("verification gap above 1e-5");
  return kExitOk;
}

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

GridAxis parse_grid(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw ldnet::InvalidParams("--grid expects name=lo:hi:step");
  GridAxis axis;
  axis.name = spec.substr(0, eq);
  double lo, hi, step;
  if (std::sscanf(spec.c_str() + eq + 1, "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
      step <= 0.0 || hi < lo)
    throw ldnet::InvalidParams("--grid expects name=lo:hi:step with step > 0");
  const long n = long((hi - lo) / step + 1e-9) + 1;
  if (n > 2000000) throw ldnet::InvalidParams("--grid has too many points");
  for (long i = 0; i < n; ++i) axis.values.push_back(lo + double(i) * step);
  return axis;
}

int cmd_sweep(const std::string& model, const std::string& input,
              const std::string& output,
              const std::vector<std::string>& grid_specs) {
  const json base = load_input(input);
  if (grid_specs.empty()) throw ldnet::InvalidParams("sweep requires --grid");
  std::vector<GridAxis> axes;
  for (const std::string& g : grid_specs) axes.push_back(parse_grid(g));

  std::ostringstream csv;
  csv << csv_header(model);

  std::string prev_regime;
  double prev_value = 0.0;
  std::vector<std::size_t> idx(axes.size(), 0);
  bool done = false;
  while (!done) {
    json pt = base;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      if (!pt.contains(axes[k].name))
        throw ldnet::InvalidParams("--grid parameter '" + axes[k].name +
                                   "' not in the input document");
      pt[axes[k].name] = axes[k].values[idx[k]];
    }
    std::string status = "ok";
    std::optional<ldnet::LDAnalysis> a;
    try {
      a = analyze_model(model, pt).analysis;
    } catch (const ldnet::RejectsUnstable&) {
      status = "unstable";
    } catch (const ldnet::DegenerateNetwork&) {
      status = "degenerate";
    } catch (const ldnet::InvalidParams&) {
      status = "invalid";
    }
    csv << analysis_csv_row(model, pt, status, a ? &*a : nullptr);

    if (a && axes.size() == 1) {
      const std::string reg = ldnet::to_string(a->regime);
      if (!prev_regime.empty() && reg != prev_regime)
        std::cerr << "transition " << prev_regime << " -> " << reg << " between "
                  << axes[0].name << " = " << ldnet::format_double(prev_value)
                  << " and " << ldnet::format_double(axes[0].values[idx[0]])
                  << "\n";
      prev_regime = reg;
      prev_value = axes[0].values[idx[0]];
    }

    done = true;
    for (std::size_t k = axes.size(); k-- > 0;) {
      if (++idx[k] < axes[k].values.size()) {
        done = false;
        break;
      }
      idx[k] = 0;
    }
  }
  write_text(output, csv.str());
  return kExitOk;
}

int cmd_simulate(const std::string& model, const std::string& input,
                 const std::string& output, const std::string& format,
                 const ldnet::SimConfig& cfg) {
  const json jin = load_input(input);
  const ldnet::CtmcModel m = sim_model(model, jin);
  const ldnet::SimEstimate est = ldnet::estimate_overflow(m, cfg);
  const ldnet::TailEstimate tail = ldnet::stationary_tail(m, cfg);

  json summary;
  summary["model"] = model;
  summary["params"] = jin;
  summary["config"] = {{"master_seed", cfg.master_seed},
                       {"levels", cfg.levels},
                       {"n_cycles", cfg.n_cycles},
                       {"splitting_effort", cfg.splitting_effort},
                       {"splitting_replicates", cfg.splitting_replicates},
                       {"level_spacing", cfg.level_spacing},
                       {"max_events", cfg.max_events},
                       {"slope_min_level", cfg.slope_min_level},
                       {"tail_ymax", cfg.tail_ymax}};
  summary["overflow"] = ldnet::to_json(est);
  summary["tail"] = ldnet::to_json(tail);

  if (format == "json") {
    write_text(output, summary.dump(2) + "\n");
    return kExitOk;
  }
  const std::string csv = ldnet::sim_csv(est);
  if (output.empty()) {
    std::cout << csv;
    std::cerr << summary.dump(2) << "\n";
  } else {
    write_text(output, csv);
    write_text(sibling_json_path(output), summary.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_path(const std::string& model, const std::string& input,
             const std::string& output) {
  const json jin = load_input(input);
  ldnet::LDAnalysis a = jin.contains("regime")
                            ? ldnet::analysis_from_json(jin)
                            : analyze_model(model, jin).analysis;
  write_text(output, ldnet::path_csv(ldnet::fluid_path(a)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rough large-deviation asymptotics of two-node networks"};
  app.require_subcommand(1);

  std::string model = "jackson-mod", input, output, format;
  std::string splitting = "off", levels_arg = "4,8,12,16,20,24";
  ldnet::SimConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", model, "jackson-mod or fork")
        ->check(CLI::IsMember({"jackson-mod", "fork"}));
    sub->add_option("--input", input,
                    "parameter JSON: a file path, '-' for stdin, or an inline "
                    "{...} document")
        ->required();
    sub->add_option("--output", output, "output path (stdout when absent)");
    sub->add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* an = app.add_subcommand("analyze", "regime and decay rate");
  add_common(an);

  CLI::App* ve = app.add_subcommand(
      "verify", "analytic values against the variational oracle");
  add_common(ve);

  CLI::App* sw = app.add_subcommand("sweep", "analysis over a parameter grid");
  add_common(sw);
  std::vector<std::string> grids;
  sw->add_option("--grid", grids, "axis spec name=lo:hi:step (repeatable)");

  CLI::App* si = app.add_subcommand("simulate", "regenerative Monte Carlo");
  add_common(si);
  si->add_option("--seed", cfg.master_seed, "master seed");
  si->add_option("--levels", levels_arg, "comma-separated overflow levels");
  si->add_option("--cycles", cfg.n_cycles, "regeneration cycles");
  si->add_option("--splitting", splitting, "off, on, N or fixed:N");
  si->add_option("--replicates", cfg.splitting_replicates,
                 "independent splitting replicates");
  si->add_option("--spacing", cfg.level_spacing, "splitting threshold spacing");
  si->add_option("--max-events", cfg.max_events, "per-cycle event cap");
  si->add_option("--slope-min", cfg.slope_min_level,
                 "smallest level entering the slope fit");
  si->add_option("--tail-ymax", cfg.tail_ymax, "largest tail height reported");
  si->add_option("--threads", cfg.threads,
                 "worker threads (default: LDNET_THREADS or hardware)");

  CLI::App* pa = app.add_subcommand(
      "path", "fluid overflow path from params or an analysis document");
  add_common(pa);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (format.empty()) format = an->parsed() || ve->parsed() ? "json" : "csv";

  try {
    if (an->parsed()) return cmd_analyze(model, input, output, format);
    if (ve->parsed()) return cmd_verify(model, input, output);
    if (sw->parsed()) return cmd_sweep(model, input, output, grids);
    if (si->parsed()) {
      cfg.splitting_effort = parse_splitting(splitting);
      cfg.levels.clear();
      std::stringstream ss(levels_arg);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) cfg.levels.push_back(std::stoi(tok));
      return cmd_simulate(model, input, output, format, cfg);
    }
    if (pa->parsed()) return cmd_path(model, input, output);
  } catch (const VerifyGap& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerify;
  } catch (const ldnet::RejectsUnstable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnstable;
  } catch (const ldnet::InvalidParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ldnet::DegenerateNetwork& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ldnet::Error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
