#pragma once

#include <floquetcm/integrate.hpp>
#include <floquetcm/odecore.hpp>

#include <optional>
#include <string>
#include <vector>

namespace fcm {

struct ProblemSpec {
    std::string system;
    Params params;
    StepperConfig integrator;
    std::vector<std::string> analyses;
    // Only for system "polynomial".
    std::optional<PolynomialSpec> polynomial;
    std::optional<double> period;
    std::vector<Vec> cycle;  // uniform samples over one period; empty means the origin
};

// Check ids accepted in "analyses".
const std::vector<std::string>& known_analyses();

// Throws UsageError naming the offending field path.
ProblemSpec parse_problem(const std::string& text);
ProblemSpec load_problem(const std::string& path);

// Canonical JSON: sorted keys, defaults written out.
std::string serialize_problem(const ProblemSpec& spec);

System build_system(const ProblemSpec& spec);

}  // namespace fcm
