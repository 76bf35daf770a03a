#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "tdc/geometry.hpp"
#include "tdc/manifold.hpp"
#include "tdc/tangential.hpp"

namespace tdc {

enum class Mode { Strict, Practical };

struct Parameters {
    double epsilon = 0.0;
    double gamma0 = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double delta0 = 0.0;
    Mode mode = Mode::Practical;
    std::uint64_t seed = 1;
    int pick_attempt_budget = 1000;
    long iteration_cap = 1000000;
    // 0: recompute exactly the stars whose cell the new site cuts. A positive
    // value additionally recomputes every star based within mult * epsilon.
    double update_radius_mult = 0.0;
    // false: only Gamma0-bad cosphericity simplices are unfit (the literal rule).
    // true: every entry of a cosphericity star is refined; the two agree whenever
    // every such simplex is bad, which holds for small enough epsilon.
    bool refine_all_cosph = true;
    std::optional<double> xi;    // heuristic default rch/16
    std::optional<double> a_vol; // heuristic default 2^m
};

// key=value lines, '#' comments. Unknown keys are a ParseError.
Parameters parse_parameters(const std::string& text, Parameters base = {});
Parameters load_parameters(const std::string& path, Parameters base = {});
// Range checks on inputs (all in (0,1) except beta > 1; delta0 < 1/4).
void validate_parameters(const Parameters& p);
const char* mode_name(Mode m);

struct DerivedConstants {
    double mu0 = 0.0;
    double eps_tilde0 = 0.0;
    double beta_prime = 0.0;
    double b_hyp = 0.0;
    double b_lemma = 0.0;
    double b = 0.0;
    double xi = 0.0;
    double a_vol = 0.0;
    bool xi_heuristic = true;
    bool a_heuristic = true;
    double e = 0.0;
    double d_vol = 0.0;
    double nu_m = 0.0;
    double eps_tilde = 0.0;
    double h1_threshold = 0.0;
};

DerivedConstants derive_constants(const Parameters& p, const Manifold& M);

struct HypothesisResult {
    std::string name;
    bool pass = false;
    bool required = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation; // "<", "<=", ">="
};

struct HypothesisReport {
    Mode mode = Mode::Practical;
    DerivedConstants constants;
    std::vector<HypothesisResult> items;
    bool ok = false;
    const HypothesisResult& get(const std::string& name) const;
};

HypothesisReport check_hypotheses(const Parameters& p, const Manifold& M);

enum class ConfigKind { Big, BadStar, BadCosph };
const char* config_kind_name(ConfigKind k);

struct UnfitConfiguration {
    ConfigKind kind = ConfigKind::Big;
    Simplex simplex; // sigma^m, or sigma^{m+1} for BadCosph
    Simplex facet;   // sigma^m carrying c_p and R_p
    int base = -1;
    TangentCenter center;
    double radius() const { return center.radius; }
};

struct Event {
    int rule = 0; // 1 or 2
    ConfigKind kind = ConfigKind::Big;
    int base = -1;
    Simplex simplex;
    Vec inserted;
    double dist_to_p = 0.0;   // d(x, P) before insertion
    double radius = 0.0;      // R_p of the refined configuration
    double dist_center = 0.0; // |c_p - x|
    int n_before = 0;
    int big_count = 0;        // Big configurations present when the rule fired
    int attempts = 0;         // pick_valid draws (rule 2)
};
std::string format_event(const Event& e);

struct RefinementState {
    ManifoldPtr manifold;
    Parameters params;
    PointSet pts;
    std::vector<TangentChart> charts;
    std::vector<Star> stars;
    std::vector<CosphStar> cosph;
    std::vector<Event> log;
    std::uint64_t pick_calls = 0;
    std::unordered_map<Simplex, GammaClass, SimplexHash> gamma_cache;

    int m() const { return manifold->intrinsic_dim(); }
    GammaClass gamma(const Simplex& s);
    CosphParams cosph_params() const { return {params.delta0, params.gamma0, params.epsilon}; }
    // Lift radius for psi_p: reach/2 in Strict mode, unbounded in Practical mode.
    double chart_radius() const;
};

RefinementState init_state(ManifoldPtr M, const PointSet& initial, const Parameters& p);

std::vector<UnfitConfiguration> classify_configurations(RefinementState& st);
// First configuration in classification order, without building the full list.
std::optional<UnfitConfiguration> first_unfit(RefinementState& st, int* big_count = nullptr);

struct PickingRegion {
    Vec center;         // ambient, on T_pM
    Vec center_tangent; // chart coordinates of p
    double radius = 0.0;
    int m = 0;
    double volume() const;
};
PickingRegion picking_region(const UnfitConfiguration& c, double alpha, int m);

struct HittingSet {
    Simplex sigma;          // indices into P
    ElementaryWeight omega; // carrier -1 denotes x itself
    double radius = 0.0;    // min R(tau, omega)
    GammaClass tau_class = GammaClass::Flake;
};
// Only the first `count` points of pts are considered (count < 0: all).
std::optional<HittingSet> find_hitting_set(const Vec& x, double r_ref, const PointSet& pts, const Parameters& p, int m,
                                           int count = -1);

struct PickResult {
    Vec point;
    Vec tangent;
    int attempts = 0;
};
PickResult pick_valid(const UnfitConfiguration& c, RefinementState& st);

// Appends x and updates stars and cosphericity stars. Throws SparsityViolation.
void insert(const Vec& x, RefinementState& st);

struct RefineSummary {
    long insertions = 0;
    long rule1 = 0;
    long rule2 = 0;
    double seconds = 0.0;
};
// before_insert is called with the state and the pending event before each insertion.
RefineSummary refine(RefinementState& st,
                     const std::function<void(const RefinementState&, const Event&)>& before_insert = {});

} // namespace tdc
