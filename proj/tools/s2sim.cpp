#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "s2/config.hpp"
#include "s2/experiments.hpp"
#include "s2/mdp.hpp"
#include "s2/meanfield.hpp"
#include "s2/verify.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kVerification = 2, kIo = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit_rows(const std::vector<s2::exp::Row>& rows, const std::string& path) {
  if (path.empty()) {
    s2::exp::write_csv(std::cout, rows);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  s2::exp::write_csv(out, rows);
  if (!out) throw IoError("write failed for " + path);
}

void append_rows(const std::vector<s2::exp::Row>& rows, const std::string& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot write " + path);
  std::ostringstream body;
  s2::exp::write_csv(body, rows);
  std::string text = body.str();
  if (!fresh) text.erase(0, text.find('\n') + 1);  // header already there
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw s2::InvalidArgument("bad grid value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
  const auto job = s2::cfg::parse_config(read_file(config_path));
  if (const auto* p = std::get_if<s2::cfg::PresetJob>(&job)) {
    const auto res = s2::exp::run_preset(p->name, p->options);
    emit_rows(res.rows, out_override.empty() ? p->output : out_override);
  } else {
    const auto& spec = std::get<s2::exp::RunSpec>(job);
    emit_rows(s2::exp::run_spec(spec), out_override.empty() ? spec.output : out_override);
  }
  return kOk;
}

int cmd_plan(const s2::meanfield::PlanInput& in, const std::string& out_path) {
  const auto sol = s2::meanfield::plan(in);
  std::cout << "d_th " << sol.d_th << '\n'
            << "root " << s2::exp::format_value(sol.root) << (sol.closed_form ? " (closed form)" : " (numeric)") << '\n'
            << "i_th " << s2::exp::format_value(sol.i_th) << '\n'
            << "p_tx " << s2::exp::format_value(sol.p_tx) << '\n'
            << "sigma " << s2::exp::format_value(sol.sigma) << '\n'
            << "sigma_root " << s2::exp::format_value(sol.sigma_root) << '\n'
            << "beta " << s2::exp::format_value(sol.beta) << '\n'
            << "eps " << s2::exp::format_value(sol.eps) << '\n'
            << "contenders " << sol.contenders << '\n';
  if (!out_path.empty()) {
    std::vector<s2::exp::Row> rows;
    auto add = [&](const char* metric, double v) { rows.push_back({"plan", 0, "all", in.nu, "etsu", metric, v}); };
    add("d_th", static_cast<double>(sol.d_th));
    add("root", sol.root);
    add("i_th", sol.i_th);
    add("p_tx", sol.p_tx);
    add("sigma", sol.sigma);
    add("beta", sol.beta);
    append_rows(rows, out_path);
  }
  return kOk;
}

int cmd_verify(bool quick) {
  s2::verify::SuiteOptions o;
  o.quick = quick;
  bool ok = true;
  for (const auto& r : s2::verify::run_suite(o)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    for (const auto& line : r.table) std::cout << "     " << line << '\n';
    if (!r.passed) {
      std::cout << "     instance " << r.instance << '\n';
      ok = false;
    }
  }
  return ok ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Status-update scheduling simulator and oracle suite"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  std::string config_path, run_out;
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", run_out, "CSV output path (overrides the config)");

  auto* preset = app.add_subcommand("preset", "run a named preset");
  std::string preset_name, preset_out, grid_text;
  s2::exp::PresetOptions po;
  preset->add_option("name", preset_name, "fig2 | fig3a | fig3b | synth-field")->required();
  preset->add_option("--n", po.n, "node count (fig2, synth-field)");
  preset->add_option("--t", po.horizon, "slots per run");
  preset->add_option("--reps", po.replications, "replications");
  preset->add_option("--seed", po.seed, "base seed");
  preset->add_option("--grid", grid_text, "comma-separated sweep values");
  preset->add_option("--d-max", po.d_max, "fig3a truncation");
  preset->add_option("--out", preset_out, "CSV output path");

  auto* plan = app.add_subcommand("plan", "mean-field operating point");
  s2::meanfield::PlanInput pi;
  std::string delta = "linear", plan_out;
  double weight = 1.0;
  plan->add_option("--lambda", pi.lambda, "up probability of d");
  plan->add_option("--mu", pi.mu, "down probability of d");
  plan->add_option("--nu", pi.nu, "fraction allowed to contend");
  plan->add_option("--n", pi.n, "node count");
  plan->add_option("--ratio", pi.slot_ratio, "t_slot / t_c");
  plan->add_option("--delta", delta, "linear | quadratic | exponential | indicator");
  plan->add_option("--weight", weight, "error weight");
  plan->add_option("--pe", pi.p_e, "transmission error probability");
  plan->add_option("--out", plan_out, "append a CSV row here");

  auto* verify = app.add_subcommand("verify", "run the oracle suite");
  bool quick = false;
  verify->add_flag("--quick", quick, "smaller instance counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(config_path, run_out);
    if (*preset) {
      po.grid = parse_grid(grid_text);
      emit_rows(s2::exp::run_preset(preset_name, po).rows, preset_out);
      return kOk;
    }
    if (*plan) {
      pi.f = s2::cfg::parse_error_function_name(delta, weight);
      return cmd_plan(pi, plan_out);
    }
    if (*verify) return cmd_verify(quick);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const s2::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const s2::mdp::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
