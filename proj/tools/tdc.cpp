#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "tdc/io.hpp"
#include "tdc/report.hpp"

using namespace tdc;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct ParamFlags {
    std::string file;
    std::optional<double> epsilon, gamma0, alpha, beta, delta0, update_radius_mult;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<int> budget;
    std::optional<long> cap;

    void attach(CLI::App* app) {
        app->add_option("--params", file, "key=value parameter file");
        app->add_option("--epsilon", epsilon);
        app->add_option("--gamma0", gamma0);
        app->add_option("--alpha", alpha);
        app->add_option("--beta", beta);
        app->add_option("--delta0", delta0);
        app->add_option("--mode", mode)->check(CLI::IsMember({"strict", "practical"}));
        app->add_option("--seed", seed);
        app->add_option("--pick-attempt-budget", budget);
        app->add_option("--iteration-cap", cap);
        app->add_option("--update-radius-mult", update_radius_mult);
    }

    Parameters resolve() const {
        Parameters p;
        if (!file.empty()) p = load_parameters(file, p);
        if (epsilon) p.epsilon = *epsilon;
        if (gamma0) p.gamma0 = *gamma0;
        if (alpha) p.alpha = *alpha;
        if (beta) p.beta = *beta;
        if (delta0) p.delta0 = *delta0;
        if (mode) p.mode = *mode == "strict" ? Mode::Strict : Mode::Practical;
        if (seed) p.seed = *seed;
        if (budget) p.pick_attempt_budget = *budget;
        if (cap) p.iteration_cap = *cap;
        if (update_radius_mult) p.update_radius_mult = *update_radius_mult;
        validate_parameters(p);
        return p;
    }
};

void write_json(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    f << j.dump(2) << '\n';
}

int exit_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidArgument: return kExitUsage;
    default: return kExitFail;
    }
}

int cmd_net(const std::string& manifold, double eps, int dense_n, std::uint64_t seed, const std::string& out,
            std::string audit_path) {
    auto M = parse_manifold(manifold);
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
    if (dense_n < 1) throw Error(ErrorKind::InvalidArgument, "dense-n must be positive");
    auto dense = M->dense_sample(dense_n, seed);
    SampleSet net = farthest_point_net(dense, eps);
    write_points_file(out, net.points);
    auto probes = M->dense_sample(std::max(1000, dense_n / 10), seed + 1);
    const double cover = estimate_covering_radius(net.points.pts, dense);
    const double cover_probe = estimate_covering_radius(net.points.pts, probes);
    const bool sparse_ok = net.points.size() < 2 || net.sparsity > eps;
    const bool cover_ok = cover <= eps;
    json j{{"schema_version", kReportSchema},
           {"manifold", M->spec()},
           {"epsilon", eps},
           {"dense_n", dense_n},
           {"seed", seed},
           {"points", net.points.size()},
           {"sparsity", number(net.sparsity)},
           {"sparsity_status", sparse_ok ? "PASS" : "FAIL"},
           {"covering_radius_dense", cover},
           {"covering_radius_probe", cover_probe},
           {"covering_status", cover_ok ? "PASS" : "FAIL"}};
    if (audit_path.empty()) audit_path = out + ".audit.json";
    write_json(audit_path, j);
    std::cout << "net: " << net.points.size() << " points, sparsity " << net.sparsity << " ("
              << (sparse_ok ? "PASS" : "FAIL") << "), covering " << cover << " (" << (cover_ok ? "PASS" : "FAIL")
              << ")\n";
    return sparse_ok && cover_ok ? kExitOk : kExitFail;
}

int cmd_hypotheses(const std::string& manifold, const ParamFlags& flags) {
    auto M = parse_manifold(manifold);
    Parameters p = flags.resolve();
    auto r = check_hypotheses(p, *M);
    std::cout << to_json(r).dump(2) << '\n';
    return r.ok ? kExitOk : kExitFail;
}

int cmd_mesh(const std::string& manifold, const ParamFlags& flags, const std::string& points_in, int dense_n,
             std::uint64_t dense_seed, const std::string& out_dir, bool audit) {
    auto M = parse_manifold(manifold);
    Parameters p = flags.resolve();
    auto hyp = check_hypotheses(p, *M);
    if (!hyp.ok) {
        std::cerr << "hypotheses not satisfied for " << mode_name(p.mode) << " mode:\n";
        for (const auto& h : hyp.items)
            if (h.required && !h.pass)
                std::cerr << "  " << h.name << ": " << h.value << " " << h.relation << " " << h.threshold
                          << " fails (ratio " << h.value / h.threshold << ")\n";
        return kExitFail;
    }
    std::filesystem::create_directories(out_dir);
    std::vector<Vec> dense;
    PointSet initial;
    if (!points_in.empty()) initial = read_points_file(points_in);
    if (audit || points_in.empty()) dense = M->dense_sample(dense_n, dense_seed);
    if (points_in.empty()) initial = farthest_point_net(dense, p.epsilon).points;

    json report{{"schema_version", kReportSchema},
                {"manifold", M->spec()},
                {"parameters", to_json(p)},
                {"hypotheses", to_json(hyp)},
                {"initial_points", initial.size()}};
    const std::string log_path = out_dir + "/events.log";
    std::ofstream log(log_path);
    int code = kExitOk;
    std::optional<RefinementState> st;
    RefineSummary sum;
    try {
        st.emplace(init_state(M, initial, p));
        sum = refine(*st, [&](const RefinementState&, const Event& e) { log << format_event(e) << '\n' << std::flush; });
        report["refinement"] = to_json(sum, *st);
    } catch (const Error& e) {
        report["error"] = e.what();
        if (st) report["refinement_partial"] = {{"points", st->pts.size()}, {"insertions", st->log.size()}};
        write_json(out_dir + "/report.json", report);
        std::cerr << "mesh: " << e.what() << '\n';
        return kExitFail;
    }
    write_points_file(out_dir + "/points.txt", st->pts);
    TangentialComplex tc = assemble_from_stars(st->stars, M->intrinsic_dim());
    write_simplices_file(out_dir + "/complex.txt", tc.simplices);
    if (M->intrinsic_dim() == 2 && M->ambient_dim() == 3) write_off_file(out_dir + "/complex.off", st->pts, tc.of_dim(2));
    if (audit) {
        std::optional<int> chi;
        RefinementAudit a = audit_refinement(*st, dense, chi);
        report["audit"] = to_json(a);
        if (!a.all_pass()) code = kExitFail;
        for (const auto& c : a.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    }
    json events = json::array();
    for (const auto& e : st->log) events.push_back(to_json(e));
    report["events"] = events;
    write_json(out_dir + "/report.json", report);
    std::cout << "mesh: " << sum.insertions << " insertions (rule1 " << sum.rule1 << ", rule2 " << sum.rule2 << "), "
              << st->pts.size() << " points, " << tc.of_dim(M->intrinsic_dim()).size() << " top simplices\n";
    return code;
}

int cmd_verify(const std::string& manifold, const std::string& complex_path, const std::string& points_path,
               double delta2, std::optional<int> euler, int dense_n, std::uint64_t seed, const std::string& out) {
    auto M = parse_manifold(manifold);
    PointSet pts = read_points_file(points_path);
    if (pts.dim != M->ambient_dim()) throw Error(ErrorKind::ParseError, "points do not match the ambient dimension");
    auto simplices = read_simplices_file(complex_path);
    for (const auto& s : simplices)
        for (int v : s)
            if (v >= pts.size()) throw Error(ErrorKind::ParseError, "complex references vertex " + std::to_string(v));
    AbstractComplex k = AbstractComplex::from_simplices(pts.size(), simplices);
    const int m = M->intrinsic_dim();
    json checks = json::array();
    bool ok = true;
    auto record = [&](const std::string& name, bool pass, json detail) {
        ok = ok && pass;
        checks.push_back({{"name", name}, {"pass", pass}, {"detail", std::move(detail)}});
        std::cout << (pass ? "PASS " : "FAIL ") << name << '\n';
    };
    if (std::isfinite(M->reach()) && (m == 2 || m == 3)) {
        auto mc = manifold_complex_check(k, m);
        record("manifold_complex", mc.ok, to_json(mc));
        for (const auto& d : mc.diagnostics) std::cout << "  " << d << '\n';
    }
    auto prot = power_protection_audit(k, pts, *M, delta2);
    record("power_protection", prot.all_pass(), to_json(prot));
    if (!prot.all_pass()) std::cout << "  min margin " << prot.min_margin << " threshold " << delta2 << '\n';
    const int chi = euler_characteristic(k);
    if (euler) record("euler_characteristic", chi == *euler, json{{"chi", chi}, {"expected", *euler}});
    if (dense_n > 0) {
        auto dense = M->dense_sample(dense_n, seed);
        auto ro = restricted_delaunay_oracle(pts, *M, dense);
        auto cmp = compare_at_resolution(k, ro.complex, pts, *M, m, 3.0 * ro.band);
        json d = to_json(cmp);
        d["resolution"] = ro.resolution;
        d["band"] = ro.band;
        record("restricted_equality", cmp.mismatches == 0, d);
    }
    json report{{"schema_version", kReportSchema},
                {"manifold", M->spec()},
                {"points", pts.size()},
                {"simplices", k.simplices.size()},
                {"euler_characteristic", chi},
                {"pass", ok},
                {"checks", checks}};
    if (!out.empty()) write_json(out, report);
    else std::cout << report.dump(2) << '\n';
    return ok ? kExitOk : kExitFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tangential Delaunay complex meshing and verification"};
    app.require_subcommand(1);

    std::string manifold = "sphere:m=2,N=3";
    double eps = 0.0;
    int dense_n = 100000;
    std::uint64_t seed = 1;
    std::string out, audit_path, points_in, out_dir = "mesh_out", complex_path;
    double delta2 = 0.0;
    std::optional<int> euler;
    bool audit = false;
    ParamFlags hyp_flags, mesh_flags;

    auto* net = app.add_subcommand("net", "farthest-point epsilon-net of a builtin manifold");
    net->add_option("--manifold", manifold)->required();
    net->add_option("--epsilon", eps)->required();
    net->add_option("--dense-n", dense_n);
    net->add_option("--seed", seed);
    net->add_option("--out", out)->required();
    net->add_option("--audit", audit_path, "sidecar audit (default <out>.audit.json)");

    auto* mesh = app.add_subcommand("mesh", "refine a sample and export the tangential complex");
    mesh->add_option("--manifold", manifold)->required();
    mesh->add_option("--points", points_in, "initial sample (default: epsilon-net of a dense sample)");
    mesh->add_option("--dense-n", dense_n);
    mesh->add_option("--dense-seed", seed);
    mesh->add_option("--out-dir", out_dir);
    mesh->add_flag("--audit", audit, "run the output audits and the restricted oracle");
    mesh_flags.attach(mesh);

    auto* verify = app.add_subcommand("verify", "check a complex against points and a manifold");
    verify->add_option("--manifold", manifold)->required();
    verify->add_option("--complex", complex_path)->required();
    verify->add_option("--points", points_in)->required();
    verify->add_option("--delta2", delta2, "power-protection threshold");
    verify->add_option("--euler", euler, "expected Euler characteristic");
    int verify_dense = 0;
    verify->add_option("--dense-n", verify_dense, "restricted oracle witnesses (0: skip)");
    verify->add_option("--seed", seed);
    verify->add_option("--report", out);

    auto* hyp = app.add_subcommand("hypotheses", "evaluate H0-H5 and derived constants");
    hyp->add_option("--manifold", manifold)->required();
    hyp_flags.attach(hyp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    try {
        if (*net) return cmd_net(manifold, eps, dense_n, seed, out, audit_path);
        if (*hyp) return cmd_hypotheses(manifold, hyp_flags);
        if (*mesh) return cmd_mesh(manifold, mesh_flags, points_in, dense_n, seed, out_dir, audit);
        if (*verify) return cmd_verify(manifold, complex_path, points_in, delta2, euler, verify_dense, seed, out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFail;
    }
    return kExitUsage;
}
