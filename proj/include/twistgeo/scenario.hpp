#pragma once

// Scenarios: a product (optionally a quotient of it) plus the curves, loops
// and expected outcomes the runner checks. Loaded from JSON files or built in.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twistgeo/quotient.hpp"

namespace twistgeo {

struct NamedCurve {
    std::string name;
    PiecewiseCurve curve;
    std::optional<Vec> vector;  // initial transported vector; default: first factor-2 coordinate vector
};

struct HolonomyExpectation {
    int leaf = 1;
    Word word;
    Mat matrix;
};

struct LeafExpectation {
    Vec point;
    int leaf = 1;
    LeafStatus status = LeafStatus::Closed;
    std::optional<double> length;
};

struct ScenarioExpect {
    std::optional<StructureTag> structure;
    std::optional<double> curvature;  // constant sectional curvature of every sampled plane
    std::optional<std::string> verdict;
    std::optional<int> intersections;
    std::vector<HolonomyExpectation> holonomy;
    std::vector<LeafExpectation> leaves;
    std::optional<bool> critical_point;
    std::optional<bool> curvature_negative;
};

struct Scenario {
    std::string name;
    std::string description;
    DoublyTwistedProduct dtp;
    std::optional<QuotientModel> quotient;
    std::optional<Example1> example1;
    Vec basepoint;
    LeafLoops loops;
    std::vector<NamedCurve> curves;
    ScenarioExpect expect;
    std::uint64_t seed = 1;
    int samples = 20;
};

// Throws GeoError(ParseError) with "source:line:column: message".
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");
Scenario load_scenario_file(const std::string& path);

std::vector<std::string> list_scenarios();
// Throws InvalidArgument for unknown names. `seed` replaces the built-in seed when set.
Scenario builtin_scenario(const std::string& name, std::optional<std::uint64_t> seed = std::nullopt);

// Letters separated by spaces, each a generator name optionally followed by ^-1; "e" is the empty word.
Word parse_word(const std::string& text, const std::vector<DeckGenerator>& generators);
StructureTag parse_structure(const std::string& text);
LeafStatus parse_leaf_status(const std::string& text);

}  // namespace twistgeo
