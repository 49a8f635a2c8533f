#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "twistgeo/runner.hpp"

namespace {

enum Exit { kPass = 0, kAssertion = 1, kInput = 2, kNumeric = 3 };

int exit_code(const twistgeo::GeoError& e) {
    using twistgeo::ErrorKind;
    return e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::InvalidArgument ? kInput : kNumeric;
}

std::vector<twistgeo::Scenario> resolve(const std::string& target, const std::optional<std::uint64_t>& seed) {
    const std::vector<std::string> names = twistgeo::list_scenarios();
    std::vector<twistgeo::Scenario> out;
    if (target == "all") {
        for (const std::string& n : names) out.push_back(twistgeo::builtin_scenario(n, seed));
    } else if (std::find(names.begin(), names.end(), target) != names.end()) {
        out.push_back(twistgeo::builtin_scenario(target, seed));
    } else if (std::filesystem::exists(target)) {
        out.push_back(twistgeo::load_scenario_file(target));
    } else {
        twistgeo::fail(twistgeo::ErrorKind::InvalidArgument,
                       "'" + target + "' is neither a built-in scenario (see 'twistgeo list') nor a file");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometry of doubly twisted products and their quotients"};
    app.set_version_flag("--version", twistgeo::kToolVersion);
    app.require_subcommand(1);

    app.add_subcommand("list", "List built-in scenarios");

    CLI::App* run = app.add_subcommand("run", "Run a command on a scenario and emit a report");
    std::string target, command, output;
    twistgeo::RunOptions opts;
    bool csv = false;
    run->add_option("scenario", target, "Built-in name, path to a JSON scenario, or 'all' for every built-in")->required();
    run->add_option("command", command, "Computation to run")->required()->check(CLI::IsMember(twistgeo::commands()));
    run->add_option("--tol", opts.tol, "Replace every assertion budget");
    run->add_option("--samples", opts.samples, "Replace the sample count");
    run->add_option("--word-bound", opts.word_bound, "Replace the quotient word bound");
    run->add_option("--seed", opts.seed, "Seed for randomized sampling");
    auto* json_flag = run->add_flag("--json", "Emit the JSON report (default)");
    run->add_flag("--csv", csv, "Emit one CSV row per check")->excludes(json_flag);
    run->add_option("-o,--output", output, "Write the report to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kInput;
    }

    if (app.got_subcommand("list")) {
        for (const std::string& n : twistgeo::list_scenarios()) std::cout << n << '\n';
        return kPass;
    }

    try {
        const std::vector<twistgeo::Scenario> scenarios = resolve(target, opts.seed);
        std::string text = csv ? "" : (scenarios.size() > 1 ? "[\n" : "");
        bool all_passed = true;
        for (size_t k = 0; k < scenarios.size(); ++k) {
            const auto start = std::chrono::steady_clock::now();
            const twistgeo::Report rep = twistgeo::run(scenarios[k], command, opts);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::cerr << rep.scenario << ' ' << rep.command << ": " << rep.checks.size() << " checks, " << rep.failures()
                      << " failed (" << secs << " s)\n";
            for (const twistgeo::CheckRecord& c : rep.checks)
                if (!c.passed) std::cerr << "  FAIL " << c.computation << '/' << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
            all_passed = all_passed && rep.passed();
            if (csv) {
                const std::string body = twistgeo::report_csv(rep);
                text += k == 0 ? body : body.substr(body.find('\n') + 1);
            } else {
                text += rep.json;
                if (scenarios.size() > 1) text.insert(text.size() - 1, k + 1 < scenarios.size() ? "," : "");
            }
        }
        if (!csv && scenarios.size() > 1) text += "]\n";
        if (output.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(output);
            if (!out) twistgeo::fail(twistgeo::ErrorKind::InvalidArgument, "cannot write '" + output + "'");
            out << text;
        }
        return all_passed ? kPass : kAssertion;
    } catch (const twistgeo::GeoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    }
}
