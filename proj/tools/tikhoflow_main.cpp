#include "tikhoflow/config.hpp"
#include "tikhoflow/csv.hpp"
#include "tikhoflow/diagnostics.hpp"
#include "tikhoflow/problems.hpp"
#include "tikhoflow/svg.hpp"

#include <CLI11.hpp>

#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace tikhoflow;

constexpr int EXIT_CHECKS_FAILED = 1;
constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_RUNTIME = 3;

int cmd_run(const std::vector<std::string>& config_paths) {
  struct Outcome {
    std::string path;
    int code = 0;
    std::string text;
  };
  auto run_one = [](const std::string& path) -> Outcome {
    Outcome out;
    out.path = path;
    std::ostringstream os;
    try {
      const cli::ExperimentConfig config = cli::load_config(path);
      const cli::RunReport report = cli::run_experiment(config);
      os << cli::format_report(config, report);
      out.code = report.all_pass() ? 0 : EXIT_CHECKS_FAILED;
    } catch (const ConfigError& e) {
      os << "config error: " << e.what() << "\n";
      out.code = EXIT_CONFIG;
    } catch (const RunFailure& e) {
      os << "run failure: " << e.what() << "\n";
      out.code = EXIT_RUNTIME;
    }
    out.text = os.str();
    return out;
  };

  std::vector<std::future<Outcome>> futures;
  futures.reserve(config_paths.size());
  for (const auto& p : config_paths)
    futures.push_back(std::async(config_paths.size() > 1 ? std::launch::async
                                                         : std::launch::deferred,
                                 run_one, p));
  int code = 0;
  for (auto& f : futures) {
    const Outcome out = f.get();
    if (config_paths.size() > 1) std::cout << "=== " << out.path << " ===\n";
    (out.code == 0 || out.code == EXIT_CHECKS_FAILED ? std::cout : std::cerr)
        << out.text;
    code = std::max(code, out.code);
  }
  return code;
}

int cmd_certify(const std::string& config_path, double override_K, double override_s5,
                double grid_end) {
  const cli::ExperimentConfig config = cli::load_config(config_path);
  if (config.params.baseline || config.params.c == 0.0)
    throw ConfigError("BaselineScale", "certification requires c > 0");
  diagnostics::ProofConstants consts =
      diagnostics::select_proof_constants(config.params);
  if (override_K > 0.0) consts.K = override_K;
  if (override_s5 > 0.0) consts.s5 = override_s5;
  const auto grid = log_spaced(config.params.t0, grid_end, 40);
  const auto cert = diagnostics::certify(config.params, consts, grid);
  std::cout << cli::format_certificate(cert);
  return cert.certified ? 0 : EXIT_CHECKS_FAILED;
}

int cmd_rates(const std::string& csv_path, const std::string& column, double exponent,
              const std::string& window, const std::string& out_path) {
  const auto pos = window.find(':');
  if (pos == std::string::npos)
    throw ConfigError("Window", "expected --window lo:hi, got '" + window + "'");
  const double lo = std::stod(window.substr(0, pos));
  const double hi = std::stod(window.substr(pos + 1));

  const csv::Table table = csv::read_csv(csv_path);
  const auto ts = table.column("t");
  const auto vs = table.column(column);
  diagnostics::Series series;
  for (size_t i = 0; i < ts.size(); ++i) series.push_back({ts[i], vs[i]});
  const auto fit = diagnostics::fit_rate(series, lo, hi, exponent, column);

  std::ostringstream os;
  os << "quantity,window_lo,window_hi,slope,r2,claimed_exponent,sup_ratio\n"
     << fit.quantity << "," << csv::format17(fit.window_lo) << ","
     << csv::format17(fit.window_hi) << "," << csv::format17(fit.slope) << ","
     << csv::format17(fit.r2) << "," << csv::format17(fit.claimed_exponent) << ","
     << csv::format17(fit.sup_ratio) << "\n";
  std::cout << os.str();
  if (fit.all_zero) std::cout << "# series identically zero; rate vacuous\n";
  if (!out_path.empty()) csv::write_text(out_path, os.str());
  return 0;
}

int cmd_plot(const std::string& csv_path, const std::string& out_path,
             const std::string& x_col, const std::vector<std::string>& y_cols,
             bool loglog, const std::vector<double>& ref_slopes,
             const std::string& title) {
  const csv::Table table = csv::read_csv(csv_path);
  svg::PlotSpec spec;
  spec.x_column = x_col;
  spec.y_columns = y_cols;
  spec.loglog = loglog;
  spec.reference_slopes = ref_slopes;
  spec.title = title;
  svg::render_svg(out_path, table, spec);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_list_problems() {
  for (const auto& p : problems::builtins())
    std::cout << p.name << "  (dim " << p.op.dim() << "): " << p.description << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulate the Tikhonov-regularized second-order flow for monotone "
               "equations and check its decay estimates"};
  app.require_subcommand(1);

  std::vector<std::string> run_configs;
  auto* run = app.add_subcommand("run", "run experiments from config files");
  run->add_option("config", run_configs, "TOML config path(s)")->required();

  std::string certify_config;
  double override_K = 0.0, override_s5 = 0.0, grid_end = 1e9;
  auto* certify = app.add_subcommand("certify", "select constants and certify the "
                                                "coefficient sign conditions");
  certify->add_option("config", certify_config, "TOML config path")->required();
  certify->add_option("--override-K", override_K, "force this K (sanity checks)");
  certify->add_option("--override-s5", override_s5, "force this s5 (sanity checks)");
  certify->add_option("--grid-end", grid_end, "certification grid endpoint");

  std::string rates_csv, rates_column = "norm_Ax", rates_window, rates_out;
  double rates_exponent = 0.0;
  auto* rates = app.add_subcommand("rates", "log-log rate fit on a CSV column");
  rates->add_option("csv", rates_csv, "input CSV")->required();
  rates->add_option("--column", rates_column, "column to fit");
  rates->add_option("--exponent", rates_exponent, "claimed power-law exponent")
      ->required();
  rates->add_option("--window", rates_window, "fit window lo:hi")->required();
  rates->add_option("-o,--out", rates_out, "also write the fit row to this CSV");

  std::string plot_csv, plot_out, plot_x = "t", plot_title;
  std::vector<std::string> plot_y;
  std::vector<double> plot_refs;
  bool plot_loglog = false;
  auto* plot = app.add_subcommand("plot", "render a CSV to a deterministic SVG");
  plot->add_option("csv", plot_csv, "input CSV")->required();
  plot->add_option("-o,--out", plot_out, "output SVG path")->required();
  plot->add_option("--x", plot_x, "x column");
  plot->add_option("--y", plot_y, "y column(s)")->required();
  plot->add_flag("--loglog", plot_loglog, "log-log axes");
  plot->add_option("--ref-slope", plot_refs, "dashed power-law guide exponent(s)");
  plot->add_option("--title", plot_title, "plot title");

  app.add_subcommand("list-problems", "list built-in problems");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_configs);
    if (certify->parsed())
      return cmd_certify(certify_config, override_K, override_s5, grid_end);
    if (rates->parsed())
      return cmd_rates(rates_csv, rates_column, rates_exponent, rates_window, rates_out);
    if (plot->parsed())
      return cmd_plot(plot_csv, plot_out, plot_x, plot_y, plot_loglog, plot_refs,
                      plot_title);
    return cmd_list_problems();
  } catch (const tikhoflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return EXIT_CONFIG;
  } catch (const tikhoflow::InfeasibleConstants& e) {
    std::cerr << "not certifiable: " << e.what() << "\n";
    return EXIT_CHECKS_FAILED;
  } catch (const tikhoflow::RunFailure& e) {
    std::cerr << "run failure: " << e.what() << "\n";
    return EXIT_RUNTIME;
  }
}
