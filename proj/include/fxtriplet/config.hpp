#pragma once

// JSON run configuration. Sections: triplet, execution, flow, ambiguity,
// simulation. Missing entries take the shipped defaults; unknown entries and
// the derived z quantities are rejected with the offending field path.

#include "fxtriplet/model.hpp"
#include "fxtriplet/simulator.hpp"

#include <json.hpp>

#include <string>

namespace fxtriplet {

struct RunConfig {
    TripletParams reference{};  // broker's model; drives the solvers
    SimConfig sim{};            // statistical measure, execution, flow, grid
    AmbiguityParams ambiguity{};

    void validate() const;
};

/// Table 1 estimates and the simulation-study setup.
RunConfig default_config();

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json config_to_json(const RunConfig& c);

/// Raised when a file cannot be read or written.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fxtriplet
