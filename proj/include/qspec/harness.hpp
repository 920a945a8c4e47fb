#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qspec::harness {

struct ResultRow {
    std::string experiment;
    int n = 0;
    std::uint64_t seed = 0;
    std::string params;
    std::string metric;
    double value = 0.0;
};

struct RunOutcome {
    std::vector<ResultRow> rows;
    int failures = 0; // verification failures; nonzero exits with code 1
};

struct CliOverrides {
    std::optional<std::string> out;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parse, validate (unknown keys rejected) and run a config file. The
/// experiment kind must match `expected_experiment` unless it is empty.
RunOutcome run_config_file(const std::string& path, const std::string& expected_experiment,
                           const CliOverrides& overrides);

/// Same, from config text (used by tests and the determinism checks).
RunOutcome run_config_text(const std::string& text, const std::string& expected_experiment,
                           const CliOverrides& overrides);

/// Built-in verification suites with default settings.
RunOutcome run_default_verify(int workers, std::uint64_t seed);

/// Deterministic CSV: header then rows, doubles at 17 significant digits,
/// LF line endings.
std::string csv_string(const std::vector<ResultRow>& rows);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

/// Output path requested by config/overrides, if any.
std::optional<std::string> configured_out(const std::string& path, const CliOverrides& o);

} // namespace qspec::harness
