#pragma once
/// @file verify.hpp
/// @brief Verification suites, refinement studies and machine-readable reports.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msa {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SuiteConfig {
    std::string suite;
    std::vector<int> grids;      // empty: the suite default
    int trials = 0;              // 0: the suite default
    std::uint64_t seed = 1;
    double band = 0.30;          // refinement band for fitted constants
    double epsilon = 0.1;        // lorentz suite
    int depth = 8;               // cantor suite
    int lorentz_n = 512;         // lorentz suite sampling
    std::string output;          // optional report path
};

struct TrialRow {
    std::string name;
    int grid = 0;
    int trial = -1;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    std::string params = "{}";  // JSON object
    std::string notes;
};

/// kind: "refinement" (fitted constant = max ratio per grid, stable within the band),
/// "property" (pass iff no violations), "value" (every row passes its own check),
/// "info" (measurement only, always passes).
struct VerificationReport {
    std::string id;
    std::string anchor;  // human-readable statement the rows measure
    std::string kind;
    std::string params = "{}";
    std::vector<TrialRow> rows;
    std::vector<std::pair<int, double>> refinement;  // (grid, fitted constant)
    double fitted = 0.0;
    std::size_t violations = 0;
    bool pass = false;
    std::string notes;
};

/// Fills refinement, fitted and pass from the rows of a refinement report.
void finish_refinement(VerificationReport& r, double band);

std::vector<VerificationReport> run_suite(const SuiteConfig& cfg);
/// Suite names accepted by run_suite.
const std::vector<std::string>& suite_names();

/// Reports as a JSON document; rows carry {name, lhs, rhs, ratio, params, grid, notes, anchor}.
std::string reports_to_json(const std::vector<VerificationReport>& reports);
bool all_pass(const std::vector<VerificationReport>& reports);

// Individual suites, also used by run_suite.
std::vector<VerificationReport> suite_lemmas_space(const SuiteConfig& cfg);
std::vector<VerificationReport> suite_scale_oracles(const SuiteConfig& cfg);
std::vector<VerificationReport> suite_trace_space(const SuiteConfig& cfg);
std::vector<VerificationReport> suite_trace_spacetime(const SuiteConfig& cfg);
std::vector<VerificationReport> suite_anisotropic(const SuiteConfig& cfg);
std::vector<VerificationReport> suite_lagrangian(const SuiteConfig& cfg);
std::vector<VerificationReport> suite_drift_trace(const SuiteConfig& cfg);
std::vector<VerificationReport> suite_cantor(const SuiteConfig& cfg);
std::vector<VerificationReport> suite_lorentz(const SuiteConfig& cfg);
std::vector<VerificationReport> suite_ns(const SuiteConfig& cfg);

}  // namespace msa
