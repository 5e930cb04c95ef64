#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "reslab/cusp_model.hpp"
#include "reslab/dioph.hpp"
#include "reslab/specfn.hpp"

namespace reslab {

struct CuspConfig {
  CuspGroup group;
  std::optional<WorstCaseSpec> worst_case;  // group built by worst_case_angle
};

struct Config {
  std::string schema_version = "1";
  int dimension_n = 0;
  std::vector<CuspConfig> cusps;
  PrecisionContext defaults;

  std::vector<ValidatedGroup> validated() const;
};

/// Parses the JSON config document. Throws ConfigError on schema problems,
/// AngleParse on bad angles, EmptyInput on an empty cusp list.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

using Cell = std::variant<std::monostate, long long, double, std::string, bool>;

struct OutputTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

enum class OutputFormat { Csv, Json };

// 17 significant digits, '.' decimal point, no grouping; inf/nan spelled out.
std::string format_double(double v);
void write_csv(const OutputTable& t, std::ostream& os);
void write_json(const OutputTable& t, std::ostream& os);
// Format from the path extension (.json or .csv), CSV otherwise.
OutputFormat format_for_path(const std::string& path);

OutputTable cmd_modes(const Config& cfg, int m_max, double b_max);
OutputTable cmd_lambda(const Config& cfg, std::vector<double> u_grid);
OutputTable cmd_resonances(int n, double R);
OutputTable cmd_resonances(const Config& cfg, double R, double c_bound = 1.0);
OutputTable cmd_bound(const Config& cfg, std::vector<double> R_grid, double C, bool diophantine);
OutputTable cmd_worstcase(const WorstCaseSpec& spec);

struct VerifyOptions {
  std::string suite = "all";  // beta | bessel | fkernel | resolvent | coefficients | all
  double grid_scale = 1.0;
  std::uint64_t seed = 2024;
  bool inject_bessel_fault = false;  // test hook: corrupt K on fine-only points
};

struct VerifyOutcome {
  bool pass = false;
  std::string json;  // machine-readable report
  std::string text;  // human-readable summary
};

VerifyOutcome cmd_verify(const VerifyOptions& opt);

// Process exit code for an exception escaping a command: 2 config, 3 resource
// guard, 4 precision exhaustion, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace reslab
