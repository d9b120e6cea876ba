#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace lyap::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Normalized run configuration: the raw JSON document with every default
/// filled in, so the config echoed into reports is complete and two runs
/// from the same file are byte-identical.
struct RunConfig {
    Json doc;

    static RunConfig from_json(Json j);
    static RunConfig load_file(const std::string& path);

    // flag overrides (applied after load, before normalization checks)
    void override_grid(int cells_per_axis);
    void override_seed(std::uint64_t seed);
    void override_tie_tol(double tol);
    void override_feas_tol(double tol);
    void override_trials(int trials);
    void override_model(const std::string& model);
    void override_report_path(const std::string& path);

    std::uint64_t seed() const { return doc.at("seed").get<std::uint64_t>(); }
    double tie_tol() const { return doc.at("tolerances").at("tie").get<double>(); }
    double feas_tol() const { return doc.at("tolerances").at("feas").get<double>(); }
    double gap_tol() const { return doc.at("tolerances").at("gap").get<double>(); }
};

}  // namespace lyap::cli
