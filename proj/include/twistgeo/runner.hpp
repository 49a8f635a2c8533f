#pragma once

// Executes named computations on a scenario and renders the report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twistgeo/scenario.hpp"
#include "twistgeo/verify.hpp"

namespace twistgeo {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchemaVersion = "1.0";

struct RunOptions {
    std::optional<double> tol;         // replaces every assertion budget
    std::optional<int> samples;        // replaces the scenario sample count
    std::optional<int> word_bound;     // replaces the quotient word bound
    std::optional<std::uint64_t> seed; // replaces the scenario seed
};

struct CheckRecord {
    std::string computation;
    std::string name;
    bool passed = false;
    std::optional<double> value;
    std::optional<double> tol;
    std::string detail;
};

struct Report {
    std::string scenario;
    std::string command;
    std::vector<CheckRecord> checks;
    std::string json;  // deterministic rendering, floats with 17 significant digits

    bool passed() const;
    int failures() const;
};

const std::vector<std::string>& commands();

// GeoErrors raised by a computation propagate with the computation named in
// the message; InvalidArgument when the command does not apply to the scenario.
Report run(const Scenario& scenario, const std::string& command, const RunOptions& opts = {});

std::string report_csv(const Report& report);

}  // namespace twistgeo
