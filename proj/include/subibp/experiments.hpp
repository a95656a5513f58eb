#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subibp/bounds.hpp"

namespace subibp {

// Fully resolved run description. Every field except `command` and `seed`
// has a default; the resolved config is echoed into every report so a run
// can be reproduced from the report alone. Worker-thread count is a runtime
// knob and deliberately not part of the config identity.
struct RunConfig {
  std::string command;
  std::string model = "zero";
  int d = 1;
  std::map<std::string, double> model_params;
  std::string sub = "stable:0.5";
  double T = 1.0;
  int n = 512;
  std::size_t paths = 100000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;

  std::string x0 = "0";
  std::string v = "1";        // semicolon-separated list of directions
  std::string a = "1";        // test-function direction
  std::string f = "sin";      // comma-separated list of function names
  double p = 2.0;
  double delta = 1.0;
  std::string eps_list = "2,1,0.5,0.1,0.01";
  std::string t_grid = "0.05,0.1,0.2,0.4,1";
  double rho = 0.75;          // scaling study index
  bool ablate_term2 = false;
  bool strict = false;
  double bandwidth = 0.0;     // 0 = Silverman
  int grid_points = 0;        // 0 = default per command
  std::string out_dir = ".";

  nlohmann::ordered_json echo() const;
};

struct Report {
  nlohmann::ordered_json json;
  std::vector<std::string> csv_lines;
  int exit_code = 0;
  std::string summary;
};

// Exit codes: 0 all checks pass, 2 statistical failure, 3 configuration or
// hypothesis violation, 4 numerical divergence.
Report run_command(const RunConfig& cfg);

// Helpers shared with the CLI and bindings.
VectorXd parse_vector(const std::string& text, int d);
std::vector<VectorXd> parse_vector_list(const std::string& text, int d);
std::vector<double> parse_double_list(const std::string& text);
ModelSpec build_model(const RunConfig& cfg);

}  // namespace subibp
