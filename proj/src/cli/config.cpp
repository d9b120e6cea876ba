#include "lyap/cli/config.hpp"

#include <fstream>

#include "lyap/errors.hpp"

namespace lyap::cli {

namespace {

void ensure(Json& obj, const char* key, Json value) {
    if (!obj.contains(key)) obj[key] = std::move(value);
}

}  // namespace

RunConfig RunConfig::from_json(Json j) {
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    ensure(j, "format_version", kFormatVersion);
    if (j.at("format_version").get<int>() != kFormatVersion)
        throw ValidationError("config: unsupported format_version");
    ensure(j, "seed", 0);

    if (!j.contains("domain") || !j.at("domain").contains("dim") ||
        !j.at("domain").contains("cells_per_axis"))
        throw ValidationError("config: domain.dim and domain.cells_per_axis are required");

    Json tol = j.value("tolerances", Json::object());
    ensure(tol, "tie", 1e-8);
    ensure(tol, "feas", 1e-9);
    ensure(tol, "gap", 1e-10);
    j["tolerances"] = tol;

    Json dual = j.value("dual", Json::object());
    ensure(dual, "box_radius", 1e3);
    ensure(dual, "max_iterations", 500);
    ensure(dual, "trust_feasible", false);
    j["dual"] = dual;

    Json detect = j.value("detect", Json::object());
    ensure(detect, "residual_tol", 1e-7);
    ensure(detect, "trials", 0);           // 0 = 200 * n
    ensure(detect, "measure_threshold", 0.0);  // 0 = 10 * n / C
    j["detect"] = detect;

    Json perturb = j.value("perturb", Json::object());
    ensure(perturb, "eta", 1e-3);
    ensure(perturb, "multiplier_radius", 10.0);
    ensure(perturb, "eps", 0.0);  // 0 = genericity threshold
    j["perturb"] = perturb;

    if (j.contains("density") && j.contains("alpha"))
        throw ValidationError("config: provide exactly one of density or alpha");

    RunConfig cfg;
    cfg.doc = std::move(j);
    return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("config " + path + ": " + e.what());
    }
    return from_json(std::move(j));
}

void RunConfig::override_grid(int cells_per_axis) {
    doc["domain"]["cells_per_axis"] = cells_per_axis;
}
void RunConfig::override_seed(std::uint64_t seed) { doc["seed"] = seed; }
void RunConfig::override_tie_tol(double tol) { doc["tolerances"]["tie"] = tol; }
void RunConfig::override_feas_tol(double tol) { doc["tolerances"]["feas"] = tol; }
void RunConfig::override_trials(int trials) {
    if (!doc.contains("probe")) doc["probe"] = Json::object();
    doc["probe"]["trials"] = trials;
}
void RunConfig::override_model(const std::string& model) {
    if (!doc.contains("probe")) doc["probe"] = Json::object();
    doc["probe"]["model"] = model;
}
void RunConfig::override_report_path(const std::string& path) {
    if (!doc.contains("output")) doc["output"] = Json::object();
    doc["output"]["report"] = path;
}

}  // namespace lyap::cli
