#pragma once

// CSV and JSON rendering of reports, plus scenario parsing. Numbers are
// printed in shortest round-trip form so identical runs give identical bytes.
// Requires nlohmann/json on the include path.

#include "wgn/error.hpp"
#include "wgn/feasible_set.hpp"
#include "wgn/optimizer.hpp"
#include "wgn/toy_harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace wgn {

using Json = nlohmann::json;

inline constexpr int kJsonSchemaVersion = 1;

inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const ProjectionReport& r)
{
    return Json{{"schema_version", kJsonSchemaVersion},
                {"n", r.output.size()},
                {"cosine_similarity", optional_number(r.cosine_similarity)},
                {"cosine_defined", r.cosine_similarity.has_value()},
                {"distance", r.distance},
                {"max_block_l1_residual", r.max_block_l1_residual},
                {"max_block_l2_residual", r.max_block_l2_residual},
                {"blocks_perturbed", r.blocks_perturbed},
                {"threshold_indices", r.threshold_indices}};
}

inline Json to_json(const SimilarityStudyResult& r)
{
    return Json{{"schema_version", kJsonSchemaVersion},
                {"sample_count", r.sample_count},
                {"undefined_count", r.undefined_count},
                {"min_cos", optional_number(r.min_cos)},
                {"mean_cos", optional_number(r.mean_cos)},
                {"p01_cos", optional_number(r.p01_cos)},
                {"seed", r.seed}};
}

/// Header "sample,cosine"; an undefined cosine leaves the field empty.
inline void write_similarity_csv(std::ostream& out, const SimilarityStudyResult& r)
{
    out << "sample,cosine\n";
    for (std::size_t s = 0; s < r.cosines.size(); ++s) {
        out << s << ',';
        if (r.cosines[s]) out << format_number(*r.cosines[s]);
        out << '\n';
    }
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& t)
{
    out << "iteration,value,norm_sq,max_residual,cos_to_init\n";
    for (const IterationRecord& r : t.records)
        out << r.iteration << ',' << format_number(r.value) << ',' << format_number(r.norm_sq) << ','
            << format_number(r.max_residual) << ',' << format_number(r.cos_to_init) << '\n';
}

/// Wall time is left out so the table is reproducible byte-for-byte.
inline void write_comparison_csv(std::ostream& out, const std::vector<ModeOutcome>& outcomes)
{
    out << "mode,final_value,max_compact_magnitude,max_residual,cos_to_init,iterations\n";
    for (const ModeOutcome& o : outcomes)
        out << to_string(o.mode) << ',' << format_number(o.final_value) << ',' << format_number(o.max_compact_magnitude)
            << ',' << format_number(o.max_residual) << ',' << format_number(o.cos_to_init) << ','
            << (o.trajectory.records.empty() ? 0 : o.trajectory.records.back().iteration) << '\n';
}

inline std::string_view to_string(Weighting w)
{
    return w == Weighting::fixed ? "fixed" : "gradient_normalized";
}

namespace detail {

template <class T>
T scenario_field(const Json& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ValidationError(std::string("scenario field '") + key + "' has the wrong type");
    }
}

inline std::size_t scenario_count(const Json& j, const char* key, std::size_t fallback)
{
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_unsigned())
        throw ValidationError(std::string("scenario field '") + key + "' must be a non-negative integer");
    return j.at(key).get<std::size_t>();
}

} // namespace detail

/// Flat object {n, block_size, target_bin, modes[], iterations, step_size,
/// clip, lambda, weighting, seed, project_gradient}. Missing fields take the
/// ScenarioConfig defaults; unknown fields are rejected.
inline ScenarioConfig parse_scenario(const Json& j)
{
    if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
    static const std::set<std::string> known{"n",      "block_size", "target_bin", "modes", "iterations", "step_size",
                                             "clip",   "lambda",     "weighting",  "seed",  "project_gradient"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ValidationError("unknown scenario field '" + key + "'");

    ScenarioConfig sc;
    sc.n = detail::scenario_count(j, "n", sc.n);
    sc.block_size = detail::scenario_count(j, "block_size", sc.block_size);
    sc.target_bin = detail::scenario_count(j, "target_bin", sc.target_bin);
    sc.iterations = detail::scenario_count(j, "iterations", sc.iterations);
    sc.step_size = detail::scenario_field<double>(j, "step_size", sc.step_size);
    sc.clip = detail::scenario_field<double>(j, "clip", sc.clip);
    sc.lambda = detail::scenario_field<double>(j, "lambda", sc.lambda);
    sc.project_gradient = detail::scenario_field<bool>(j, "project_gradient", sc.project_gradient);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ValidationError("scenario field 'seed' must be an unsigned integer");
        sc.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("weighting")) {
        const auto w = detail::scenario_field<std::string>(j, "weighting", "");
        if (w == "fixed") sc.weighting = Weighting::fixed;
        else if (w == "gradient_normalized") sc.weighting = Weighting::gradient_normalized;
        else throw ValidationError("unknown weighting '" + w + "'");
    }
    if (j.contains("modes")) {
        const auto names = detail::scenario_field<std::vector<std::string>>(j, "modes", {});
        sc.modes.clear();
        for (const std::string& name : names) {
            const ComparisonMode m = parse_comparison_mode(name);
            if (std::find(sc.modes.begin(), sc.modes.end(), m) != sc.modes.end())
                throw ValidationError("mode '" + name + "' listed twice");
            sc.modes.push_back(m);
        }
    }
    if (!std::isfinite(sc.lambda) || sc.lambda < 0.0) throw ValidationError("lambda must be finite and >= 0");
    scenario_layout(sc);
    scenario_optimizer_config(sc);
    return sc;
}

inline ScenarioConfig parse_scenario_text(std::string_view text)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw FormatError(std::string("scenario is not valid JSON: ") + e.what());
    }
    return parse_scenario(j);
}

} // namespace wgn
