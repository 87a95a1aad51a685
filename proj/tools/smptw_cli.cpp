// smptw: command-line front end for sampling, fitting, the simulation study,
// the model comparison and curve tables.
//
// Exit codes: 0 success, 2 bad input (domain or parse errors), 3 numeric
// non-convergence.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "smptw/harness.hpp"

namespace {

namespace h = smptw::harness;
namespace zoo = smptw::zoo;

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct ConvergenceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw smptw::DomainError("cannot write " + path);
  return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

h::CurveGrid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.push_back(text.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (parts.size() != 3) throw smptw::DomainError("--grid expects A,B,K");
  const auto a = h::detail::parse_double(parts[0]);
  const auto b = h::detail::parse_double(parts[1]);
  const auto k = h::detail::parse_double(parts[2]);
  if (!a || !b || !k || *k != std::floor(*k) || *k > 1e8) {
    throw smptw::DomainError("--grid expects two numbers and an integer count");
  }
  return {*a, *b, static_cast<int>(*k)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SMP-transformed standard Weibull toolkit"};
  app.require_subcommand(1);

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Draw a seeded sample (CSV)");
  double s_lambda = 1.0, s_phi = 1.0;
  std::size_t s_n = 0;
  std::uint64_t s_seed = 0;
  std::string s_out;
  sample_cmd->add_option("--lambda", s_lambda, "SMP parameter")->required();
  sample_cmd->add_option("--phi", s_phi, "Weibull shape")->required();
  sample_cmd->add_option("--n", s_n, "Sample size")->required();
  sample_cmd->add_option("--seed", s_seed, "64-bit seed")->required();
  sample_cmd->add_option("--out", s_out, "Output CSV (default stdout)");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood fit of one model");
  std::string f_data, f_model = "smptw_2p", f_out;
  double f_level = 0.95;
  fit_cmd->add_option("--data", f_data, "Data file")->required();
  fit_cmd->add_option("--model", f_model, "Model key (smptw_2p, two_param_weibull, ...)");
  fit_cmd->add_option("--level", f_level, "Wald interval level");
  fit_cmd->add_option("--out", f_out, "Write the fit as JSON");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of the SMPtW estimator");
  std::string m_plan, m_out;
  bool m_published = false;
  std::optional<int> m_reps;
  std::optional<std::uint64_t> m_seed;
  std::optional<double> m_level;
  unsigned m_threads = 0;
  auto* plan_opt = sim_cmd->add_option("--plan", m_plan, "Plan JSON file");
  auto* t2_opt = sim_cmd->add_flag("--paper-table2", m_published, "Use the published five-pair plan");
  plan_opt->excludes(t2_opt);
  sim_cmd->add_option("--replications", m_reps, "Override replications");
  sim_cmd->add_option("--seed", m_seed, "Override base seed");
  sim_cmd->add_option("--level", m_level, "Override confidence level");
  sim_cmd->add_option("--threads", m_threads, "Worker threads (0 = all cores)");
  sim_cmd->add_option("--out", m_out, "Report JSON")->required();

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Fit and rank the competitor models");
  std::string c_data, c_out;
  bool c_faithful = false;
  cmp_cmd->add_option("--data", c_data, "Data file")->required();
  cmp_cmd->add_option("--out", c_out, "Report JSON")->required();
  cmp_cmd->add_flag("--paper-faithful", c_faithful, "Leave the two-parameter SMPtW out of the ranking");

  // curves
  auto* cur_cmd = app.add_subcommand("curves", "pdf/cdf/survival/hazard on a grid (CSV)");
  double k_lambda = 1.0, k_phi = 1.0;
  std::string k_grid, k_out;
  cur_cmd->add_option("--lambda", k_lambda, "SMP parameter")->required();
  cur_cmd->add_option("--phi", k_phi, "Weibull shape")->required();
  cur_cmd->add_option("--grid", k_grid, "start,stop,count")->required();
  cur_cmd->add_option("--out", k_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*sample_cmd) {
      const auto values = smptw::sample(smptw::SmptwParams(s_lambda, s_phi), s_n, smptw::SeededStream(s_seed, 0));
      if (s_out.empty()) {
        h::write_sample_csv(std::cout, values);
      } else {
        auto out = open_output(s_out);
        h::write_sample_csv(out, values);
      }
    } else if (*fit_cmd) {
      const auto model = zoo::parse_model_id(f_model);
      if (!model) throw smptw::DomainError("unknown model '" + f_model + "'");
      const auto ds = h::load_dataset(f_data);
      const auto& spec = zoo::model_spec(*model);
      const auto fit = zoo::fit_model(spec, ds.values);
      std::cout << spec.display_name << ", n = " << ds.values.size() << "\n" << h::format_table(fit);
      nlohmann::json j = {{"schema_version", h::kSchemaVersion}, {"kind", "fit"}, {"model_id", spec.key},
                          {"dataset", ds.name}, {"n", ds.values.size()}, {"fit", h::to_json(fit)}};
      if (fit.converged && ds.values.size() > static_cast<std::size_t>(spec.param_count) + 1) {
        j["criteria"] = h::to_json(smptw::information_criteria(fit.log_likelihood, spec.param_count,
                                                               static_cast<int>(ds.values.size())));
      }
      if (fit.std_errors_available) {
        nlohmann::json cis = nlohmann::json::array();
        for (std::size_t i = 0; i < fit.estimates.size(); ++i) {
          const auto ci = smptw::wald_interval(fit, i, f_level);
          cis.push_back({{"name", fit.param_names[i]}, {"lower", ci.lower}, {"upper", ci.upper}, {"level", f_level}});
        }
        j["intervals"] = cis;
      }
      if (!f_out.empty()) write_json(f_out, j);
      if (!fit.converged) throw ConvergenceFailure("fit did not converge: " + fit.message);
    } else if (*sim_cmd) {
      if (m_plan.empty() && !m_published) throw smptw::DomainError("simulate needs --plan or --paper-table2");
      auto plan = m_published ? h::published_study_plan() : h::load_plan(m_plan);
      if (m_reps) plan.replications = *m_reps;
      if (m_seed) plan.base_seed = *m_seed;
      if (m_level) plan.confidence_level = *m_level;
      const auto report = h::run_simulation(plan, {m_threads});
      write_json(m_out, h::to_json(report));
      std::cout << h::format_table(report);
    } else if (*cmp_cmd) {
      const auto ds = h::load_dataset(c_data);
      const auto report = h::run_application(ds, {c_faithful});
      write_json(c_out, h::to_json(report));
      std::cout << h::format_table(report);
    } else if (*cur_cmd) {
      const auto rows = h::emit_curves(smptw::SmptwParams(k_lambda, k_phi), parse_grid(k_grid));
      auto out = open_output(k_out);
      h::write_curves_csv(out, rows);
    }
  } catch (const smptw::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const smptw::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ConvergenceFailure& e) {
    std::cerr << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
