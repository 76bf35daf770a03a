#include "tdc/report.hpp"

#include <cmath>

namespace tdc {

using nlohmann::json;

json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json to_json(const Parameters& p) {
    json j{{"epsilon", p.epsilon}, {"gamma0", p.gamma0},   {"alpha", p.alpha},
           {"beta", p.beta},       {"delta0", p.delta0},   {"mode", mode_name(p.mode)},
           {"seed", p.seed},       {"pick_attempt_budget", p.pick_attempt_budget},
           {"iteration_cap", p.iteration_cap},             {"update_radius_mult", p.update_radius_mult},
           {"refine_all_cosph", p.refine_all_cosph}};
    if (p.xi) j["xi"] = *p.xi;
    if (p.a_vol) j["A"] = *p.a_vol;
    return j;
}

json to_json(const DerivedConstants& c) {
    return json{{"mu0", c.mu0},
                {"eps_tilde0", c.eps_tilde0},
                {"beta_prime", c.beta_prime},
                {"B_hyp", c.b_hyp},
                {"B_lemma", c.b_lemma},
                {"B", c.b},
                {"xi", c.xi},
                {"xi_heuristic", c.xi_heuristic},
                {"A", c.a_vol},
                {"A_heuristic", c.a_heuristic},
                {"E", number(c.e)},
                {"D", c.d_vol},
                {"nu_m", c.nu_m},
                {"eps_tilde", c.eps_tilde},
                {"H1_threshold", c.h1_threshold}};
}

json to_json(const HypothesisReport& r) {
    json items = json::array();
    for (const auto& h : r.items) {
        double ratio = h.threshold != 0.0 ? h.value / h.threshold : (h.value == 0.0 ? 0.0 : INFINITY);
        items.push_back({{"name", h.name},
                         {"pass", h.pass},
                         {"required", h.required},
                         {"value", number(h.value)},
                         {"relation", h.relation},
                         {"threshold", number(h.threshold)},
                         {"margin_ratio", number(ratio)}});
    }
    return json{{"schema_version", kReportSchema},
                {"mode", mode_name(r.mode)},
                {"ok", r.ok},
                {"constants", to_json(r.constants)},
                {"hypotheses", items}};
}

json to_json(const ProtectionReport& r, bool with_entries) {
    json j{{"threshold", r.threshold},
           {"pairs", r.entries.size()},
           {"failures", r.failures},
           {"min_margin", number(r.min_margin)},
           {"pass", r.all_pass()}};
    json fails = json::array();
    for (const auto& e : r.entries) {
        if (!with_entries && e.pass) continue;
        json x{{"simplex", e.simplex}, {"vertex", e.vertex}, {"margin", number(e.margin)}, {"pass", e.pass}};
        if (!e.error.empty()) x["error"] = e.error;
        fails.push_back(std::move(x));
    }
    j[with_entries ? "entries" : "failed_entries"] = fails;
    return j;
}

json to_json(const ManifoldCheck& m) {
    return json{{"pass", m.ok}, {"bad_vertices", m.bad_vertices}, {"diagnostics", m.diagnostics}};
}

json to_json(const ResolvedCompare& c) {
    json diffs = json::array();
    for (const auto& d : c.diffs)
        diffs.push_back({{"simplex", d.simplex},
                         {"in", d.in_first ? "first" : "second"},
                         {"margin", number(d.margin)},
                         {"resolved", d.resolved}});
    return json{{"threshold", c.threshold},
                {"equal", c.raw.equal},
                {"mismatches", c.mismatches},
                {"unresolved", c.unresolved},
                {"differences", diffs}};
}

json to_json(const RefinementAudit& a) {
    json checks = json::array();
    for (const auto& c : a.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    json j{{"pass", a.all_pass()},
           {"checks", checks},
           {"euler_characteristic", a.euler},
           {"min_edge", number(a.min_edge)},
           {"min_thickness", number(a.min_thickness)},
           {"protection", to_json(a.protection)},
           {"manifold", to_json(a.manifold)},
           {"restricted_oracle",
            {{"resolution", a.restricted.resolution},
             {"band", a.restricted.band},
             {"witnesses", a.restricted.witnesses},
             {"candidates", a.restricted.candidates},
             {"min_certified_margin", number(a.restricted.min_margin)}}},
           {"comparison", to_json(a.comparison)}};
    std::map<int, int> counts;
    for (const auto& s : a.complex.simplices) ++counts[simplex_dim(s)];
    json fc = json::object();
    for (const auto& [d, c] : counts) fc[std::to_string(d)] = c;
    j["face_counts"] = fc;
    return j;
}

json to_json(const Event& e) {
    return json{{"rule", e.rule},
                {"kind", config_kind_name(e.kind)},
                {"base", e.base},
                {"simplex", e.simplex},
                {"radius", e.radius},
                {"dist_to_P", e.dist_to_p},
                {"dist_center", e.dist_center},
                {"n_before", e.n_before},
                {"big_count", e.big_count},
                {"attempts", e.attempts}};
}

json to_json(const RefineSummary& s, const RefinementState& st) {
    return json{{"insertions", s.insertions},
                {"rule1", s.rule1},
                {"rule2", s.rule2},
                {"points", st.pts.size()},
                {"pick_calls", st.pick_calls}};
}

} // namespace tdc
