#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "subibp/experiments.hpp"

namespace {

using subibp::RunConfig;

// Plain key = value file, '#' comments. Flags given on the command line take
// precedence over file values.
void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw subibp::ConfigurationError("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "model") cfg.model = value;
    else if (key == "d") cfg.d = std::stoi(value);
    else if (key == "sub") cfg.sub = value;
    else if (key == "T") cfg.T = std::stod(value);
    else if (key == "n") cfg.n = std::stoi(value);
    else if (key == "paths") cfg.paths = std::stoull(value);
    else if (key == "seed") { cfg.seed = std::stoull(value); cfg.seed_set = true; }
    else if (key == "threads") cfg.threads = std::stoi(value);
    else if (key == "x0") cfg.x0 = value;
    else if (key == "v") cfg.v = value;
    else if (key == "a") cfg.a = value;
    else if (key == "f") cfg.f = value;
    else if (key == "p") cfg.p = std::stod(value);
    else if (key == "delta") cfg.delta = std::stod(value);
    else if (key == "eps_list") cfg.eps_list = value;
    else if (key == "t_grid") cfg.t_grid = value;
    else if (key == "rho") cfg.rho = std::stod(value);
    else if (key == "ablate_term2") cfg.ablate_term2 = (value == "1" || value == "true");
    else if (key == "strict") cfg.strict = (value == "1" || value == "true");
    else if (key == "bandwidth") cfg.bandwidth = std::stod(value);
    else if (key == "grid_points") cfg.grid_points = std::stoi(value);
    else if (key == "out") cfg.out_dir = value;
    else if (key.rfind("model.", 0) == 0)
      cfg.model_params[key.substr(6)] = std::stod(value);
    else
      throw subibp::ConfigurationError("unknown config key: " + key);
  }
}

void add_common_options(CLI::App* cmd, RunConfig& cfg, std::string& config_path,
                        bool& seed_given,
                        std::vector<std::string>& model_param_kvs) {
  cmd->add_option("--config", config_path, "key = value config file");
  cmd->add_option("--model", cfg.model, "model name: zero|ou|rotation|sine");
  cmd->add_option("--d", cfg.d, "state dimension");
  cmd->add_option("--sub", cfg.sub,
                  "subordinator: stable:RHO | cpoisson:RATE,MEAN | "
                  "driftonly:SLOPE | fixed:t:s,...");
  cmd->add_option("--T", cfg.T, "time horizon");
  cmd->add_option("--n", cfg.n, "grid steps");
  cmd->add_option("--paths", cfg.paths, "Monte Carlo paths");
  cmd->add_option("--seed", cfg.seed, "master seed (required)")
      ->trigger_on_parse()
      ->each([&seed_given](const std::string&) { seed_given = true; });
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = auto)");
  cmd->add_option("--x0", cfg.x0, "start point, comma separated");
  cmd->add_option("--v", cfg.v, "direction(s), ';' separated");
  cmd->add_option("--a", cfg.a, "test function direction");
  cmd->add_option("--f", cfg.f, "test function name(s), ',' separated");
  cmd->add_option("--p", cfg.p, "exponent p > 1");
  cmd->add_option("--delta", cfg.delta, "entropy bound delta");
  cmd->add_option("--eps-list", cfg.eps_list, "truncation levels");
  cmd->add_option("--t-grid", cfg.t_grid, "time grid for scaling / L^p checks");
  cmd->add_option("--rho", cfg.rho, "stable index for the scaling study");
  cmd->add_flag("--ablate-term2", cfg.ablate_term2,
                "also test the weight with the trace correction removed");
  cmd->add_flag("--strict", cfg.strict, "escalate divergence warnings");
  cmd->add_option("--bandwidth", cfg.bandwidth, "kernel bandwidth (0 = Silverman)");
  cmd->add_option("--grid-points", cfg.grid_points, "grid points per dimension");
  cmd->add_option("--out", cfg.out_dir, "output directory for reports");
  cmd->add_option("--model-param", model_param_kvs,
                  "model parameter NAME=VALUE (repeatable)");
}

void apply_model_params(const std::vector<std::string>& kvs, RunConfig& cfg) {
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw subibp::ConfigurationError("--model-param expects NAME=VALUE, got " +
                                       kv);
    cfg.model_params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo checks for SDEs driven by subordinate Brownian "
               "motion: integration-by-parts weights, shift Harnack and "
               "gradient bounds, heat kernel estimates"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  bool seed_given = false;
  std::vector<std::string> model_param_kvs;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify-ibp", "paired test of the integration-by-parts identity"},
      {"verify-ibp-fixed-path", "identity test along a fixed pure-jump path"},
      {"truncation", "small-jump truncation convergence study"},
      {"bounds", "gradient / entropy / shift Harnack inequality checks"},
      {"scaling", "small-time scaling study for stable subordinators"},
      {"density", "kernel density and log-density gradient estimates"},
      {"moments", "subordinator moment oracles vs Monte Carlo"},
  };
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    add_common_options(sub, cfg, config_path, seed_given, model_param_kvs);
  }

  CLI11_PARSE(app, argc, argv);

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) {
      // reparse after the file so explicit flags win
      RunConfig file_cfg;
      file_cfg.command = cfg.command;
      apply_config_file(config_path, file_cfg);
      const bool file_seed = file_cfg.seed_set;
      // overlay: start from file values, then apply the command line again
      std::swap(cfg, file_cfg);
      app.clear();
      CLI11_PARSE(app, argc, argv);
      cfg.seed_set = seed_given || file_seed;
    } else {
      cfg.seed_set = seed_given;
    }
    apply_model_params(model_param_kvs, cfg);

    const auto t0 = std::chrono::steady_clock::now();
    const subibp::Report report = subibp::run_command(cfg);
    const auto t1 = std::chrono::steady_clock::now();

    std::filesystem::create_directories(cfg.out_dir);
    const auto json_path = std::filesystem::path(cfg.out_dir) / "report.json";
    const auto csv_path = std::filesystem::path(cfg.out_dir) / "report.csv";
    {
      std::ofstream out(json_path);
      out << report.json.dump(2) << "\n";
    }
    {
      std::ofstream out(csv_path);
      for (const auto& line : report.csv_lines) out << line << "\n";
    }
    std::cout << report.summary << "\n";
    std::cout << "wrote " << json_path.string() << ", " << csv_path.string()
              << " ("
              << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0)
                     .count()
              << " ms)\n";
    return report.exit_code;
  } catch (const subibp::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const subibp::DegeneratePathError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const subibp::SimulationDiverged& e) {
    std::cerr << "numerical divergence: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
