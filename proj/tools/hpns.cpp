// Command-line front end: one subcommand per pipeline, CSV for fields,
// JSON summary on stdout (and in summary.json).
//
// Exit status: 0 success, 1 invalid input, 2 numerical failure, 3 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hpns/io.hpp"
#include "hpns/jeffery_hamel.hpp"
#include "hpns/navier_stokes.hpp"
#include "hpns/stokes.hpp"
#include "hpns/truncated.hpp"
#include "hpns/weighted_spaces.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hpns;

namespace {

struct Context {
    fs::path out = ".";
    std::string config;

    void write(const std::string& name, const std::string& content) const { io::write_atomic(out / name, content); }
};

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json norm_json(const NormReport& r) {
    json terms = json::array();
    for (const auto& t : r.terms) terms.push_back({{"i", t.i}, {"j", t.j}, {"alpha", t.alpha}, {"q", t.q}, {"value", t.value}});
    return {{"family", family_name(r.index.family)}, {"alpha", r.index.alpha}, {"q", r.index.q}, {"value", r.value},
            {"terms", terms}};
}

/// The effective configuration of the active subcommand, one key=value per
/// line; the output directory is not part of it.
std::string active_config(const CLI::App& app, const CLI::App& sub) {
    std::istringstream in(app.config_to_str(true, false));
    std::ostringstream os;
    const std::string prefix = sub.get_name() + ".";
    for (std::string line; std::getline(in, line);) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        if (key == "out") continue;
        if (key.find('.') == std::string::npos || key.rfind(prefix, 0) == 0) os << line << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------- jh-solve

struct JHSolveArgs {
    double phi = 0.0;
    int branch = 0;
    std::size_t n_theta = 1025;
    double tol = 1e-12;
    int max_iter = 200;
};

json run_jh_solve(const JHSolveArgs& a, const Context& ctx) {
    JHOptions opt;
    opt.tol = a.tol;
    opt.max_iter = a.max_iter;
    const auto s = solve_jh(a.phi, a.branch, ThetaGrid(a.n_theta), opt);
    io::Table t({"theta", "f", "f_prime"});
    for (std::size_t i = 0; i < s.theta.size(); ++i) t.row(s.theta[i], s.f[i], s.f_prime[i]);
    ctx.write("jh_profile.csv", t.str(ctx.config));
    return {{"phi", s.phi}, {"branch", s.branch},          {"A", s.A},
            {"C", s.C},     {"iterations", s.iterations}, {"flux", flux_of(s)},
            {"sup_f", s.sup_f()}, {"ode_residual", ode_residual(s)}, {"files", {"jh_profile.csv"}}};
}

// ----------------------------------------------------------------- jh-scan

struct JHScanArgs {
    double phi_min = -0.02;
    double phi_max = 0.02;
    std::size_t n = 41;
    std::size_t n_theta = 1025;
};

json run_jh_scan(const JHScanArgs& a, const Context& ctx) {
    const auto rows = scan_branches(a.phi_min, a.phi_max, a.n, ThetaGrid(a.n_theta));
    io::Table t({"phi", "branch", "A", "C", "sup_f", "iters"});
    std::size_t negative = 0;
    for (const auto& r : rows) {
        t.row(r.phi, r.branch, r.A, r.C, r.sup_f, r.iterations);
        negative += r.phi < 0.0 && r.branch == 0;
    }
    ctx.write("branches.csv", t.str(ctx.config));
    return {{"rows", rows.size()}, {"samples", a.n}, {"negative_samples", negative}, {"files", {"branches.csv"}}};
}

// ------------------------------------------------------------------- norms

struct NormsArgs {
    std::string field;
    std::string trace;
    std::string family = "U";
    double alpha = 2.5;
    double q = 1.5;
};

json run_norms(const NormsArgs& a) {
    const SpaceIndex idx(parse_family(a.family), a.alpha, a.q);
    if (idx.is_boundary()) {
        if (a.trace.empty()) throw ValidationError("norms: family " + a.family + " needs --trace");
        const auto [kg, t] = io::read_trace(a.trace);
        return norm_json(norm_boundary(kg, t, idx));
    }
    if (a.field.empty()) throw ValidationError("norms: family " + a.family + " needs --field");
    const auto d = io::read_field(a.field);
    return norm_json(norm_bulk(d.kgrid, d.ygrid, d.field, idx));
}

// ------------------------------------------------------------ stokes-solve

struct StokesArgs {
    double alpha = 2.5;
    double q = 1.5;
    double kmax = 40.0;
    double ymax = 200.0;
    std::size_t nk = 0;
    std::size_t ny = 256;
    std::string R, S, ustar, vstar;
    double tail_tol = 1e-9;
    double compat_tol = 1e-10;
};

json run_stokes(const StokesArgs& a, const Context& ctx) {
    KGrid kg;
    YGrid yg;
    ForcingTensor Q;
    if (!a.R.empty() || !a.S.empty()) {
        if (a.R.empty() || a.S.empty()) throw ValidationError("stokes-solve: --R and --S go together");
        auto r = io::read_field(a.R);
        auto s = io::read_field(a.S);
        if (r.kgrid.modes().size() != s.kgrid.modes().size() || r.ygrid.size() != s.ygrid.size() ||
            !std::equal(r.kgrid.modes().begin(), r.kgrid.modes().end(), s.kgrid.modes().begin()) ||
            !std::equal(r.ygrid.nodes().begin(), r.ygrid.nodes().end(), s.ygrid.nodes().begin()))
            throw ValidationError("stokes-solve: R and S are sampled on different grids");
        kg = r.kgrid;
        yg = r.ygrid;
        Q = {std::move(r.field), std::move(s.field)};
    } else {
        if (!a.ustar.empty() || !a.vstar.empty())
            kg = io::read_trace(a.ustar.empty() ? a.vstar : a.ustar).first;
        else
            kg = a.nk > 0 ? KGrid::log_spaced(1e-4, a.kmax, a.nk, true) : KGrid::standard(a.kmax);
        yg = YGrid::standard(a.ymax, a.ny);
        Q = {SpectralField(kg.size(), yg.size()), SpectralField(kg.size(), yg.size())};
    }
    const BoundaryTrace us = a.ustar.empty() ? BoundaryTrace(kg.size()) : io::read_trace(a.ustar, kg);
    const BoundaryTrace vs = a.vstar.empty() ? BoundaryTrace(kg.size()) : io::read_trace(a.vstar, kg);

    const StokesOptions opt{TailOptions{a.tail_tol}};
    const auto rep = compatibility(kg, yg, Q, us, vs, a.q, a.compat_tol, opt.tail);
    const auto sol = solve_stokes(kg, yg, Q, us, vs, opt);

    ctx.write("u_hat.csv", io::field_csv(kg, yg, sol.u_hat, ctx.config));
    ctx.write("v_hat.csv", io::field_csv(kg, yg, sol.v_hat, ctx.config));
    ctx.write("p_hat.csv", io::field_csv(kg, yg, sol.p_hat, ctx.config));
    ctx.write("u_r.csv", io::trace_csv(kg, sol.u_r, ctx.config));
    ctx.write("v_r.csv", io::trace_csv(kg, sol.v_r, ctx.config));

    json residuals = json::object();
    for (std::size_t i = 0; i < rep.names.size(); ++i) residuals[rep.names[i]] = cjson(rep.residuals[i]);
    const json compat = {{"regime", rep.regime}, {"residuals", residuals}, {"tol", rep.tol}, {"satisfied", rep.satisfied}};
    ctx.write("compatibility.json", compat.dump(2) + "\n");
    const SpaceIndex U(Family::U, a.alpha, a.q);
    return {{"nk", kg.size()},
            {"ny", yg.size()},
            {"compatibility", compat},
            {"norm_u", norm_bulk(kg, yg, sol.u_hat, U).value},
            {"norm_v", norm_bulk(kg, yg, sol.v_hat, U).value},
            {"files", {"u_hat.csv", "v_hat.csv", "p_hat.csv", "u_r.csv", "v_r.csv", "compatibility.json"}}};
}

// ---------------------------------------------------------------- ns-solve

struct NSArgs {
    double phi = -0.01;
    int branch = 0;
    double alpha = 2.5;
    double q = 1.5;
    double tol = 1e-10;
    int max_iter = 50;
    double damping = 1.0;
    double kmax = 25.0;
    double k_ratio = 1.12;
    double dk_max = 0.4;
    double ymax = 200.0;
    std::size_t ny = 128;
    std::string trace_u;
    std::string trace_v;
    double perturbation = 0.0;
    double conv_tol = 1e-8;
};

json run_ns(const NSArgs& a, const Context& ctx) {
    const KGrid kg = KGrid::graded(1e-4, a.kmax, a.k_ratio, a.dk_max);
    const YGrid yg = YGrid::standard(a.ymax, a.ny);
    BoundaryTrace us = a.trace_u.empty() ? BoundaryTrace(kg.size()) : io::read_trace(a.trace_u, kg);
    const BoundaryTrace vs = a.trace_v.empty() ? BoundaryTrace(kg.size()) : io::read_trace(a.trace_v, kg);
    if (a.perturbation != 0.0) {
        // Built-in perturbation û_s = c·ik e^{−k²/2} with T-norm `perturbation`.
        auto p = BoundaryTrace::sample(kg, [](double k) { return cplx(0.0, k * std::exp(-k * k / 2)); });
        p *= a.perturbation / norm_boundary(kg, p, SpaceIndex(Family::T, a.alpha, a.q)).value;
        us += p;
    }
    NSOptions opt;
    opt.tol = a.tol;
    opt.max_iter = a.max_iter;
    opt.damping = a.damping;
    opt.conv_tol = a.conv_tol;
    const NSProblem pb{a.phi, a.branch, us, vs, kg, yg, a.alpha, a.q};
    const auto s = picard_solve(pb, opt);

    ctx.write("u1_hat.csv", io::field_csv(kg, yg, s.u1.u, ctx.config));
    ctx.write("v1_hat.csv", io::field_csv(kg, yg, s.u1.v, ctx.config));
    ctx.write("p1_hat.csv", io::field_csv(kg, yg, s.p_hat, ctx.config));
    ctx.write("trace_u.csv", io::trace_csv(kg, us, ctx.config));
    ctx.write("trace_v.csv", io::trace_csv(kg, vs, ctx.config));
    io::Table it({"sweep", "norm_u1", "a", "distance"});
    for (const auto& r : s.trace_log) it.row(r.sweep, r.norm_u1, r.a, r.distance);
    ctx.write("iterations.csv", it.str(ctx.config));
    const auto decay = decay_report(kg, yg, s.u1);
    io::Table dt({"y", "sup", "weighted"});
    for (const auto& r : decay.rows) dt.row(r.y, r.sup, r.weighted);
    ctx.write("decay.csv", dt.str(ctx.config));

    double flux_defect = 0.0;
    for (double f : flux_profile(kg, s.u_jh.v + s.u1.v)) flux_defect = std::max(flux_defect, std::abs(f - a.phi));
    const auto Q = assemble_forcing(kg, yg, s.u_jh, s.u1, opt.conv_tol);
    const double r_norm = norm_bulk(kg, yg, Q.R, SpaceIndex(Family::R, a.alpha, a.q + 1.0)).value;
    const SpaceIndex U(Family::U, a.alpha, a.q);
    return {{"converged", s.converged},
            {"sweeps", s.trace_log.size()},
            {"distance", s.trace_log.empty() ? 0.0 : s.trace_log.back().distance},
            {"a", s.a + 0.0},
            {"A", s.A + 0.0},
            {"asymmetry_bound", r_norm / a.q},
            {"norm_u1", norm_bulk(kg, yg, s.u1.u, U).value},
            {"norm_v1", norm_bulk(kg, yg, s.u1.v, U).value},
            {"decay_slope", decay.slope},
            {"flux_defect", flux_defect},
            {"nk", kg.size()},
            {"ny", yg.size()},
            {"files", {"u1_hat.csv", "v1_hat.csv", "p1_hat.csv", "trace_u.csv", "trace_v.csv", "iterations.csv", "decay.csv"}}};
}

// ---------------------------------------------------------------- simulate

struct SimArgs {
    double phi = 0.05;
    double nu = 0.5;
    double R = 200.0;
    std::size_t nr = 256;
    std::size_t ntheta = 192;
    double rho_min = 1.0;
    double newton_tol = 1e-10;
    std::vector<double> profile_r;
};

std::string radius_tag(double r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

json run_simulate(const SimArgs& a, const Context& ctx) {
    SimulateOptions opt;
    opt.n_r = a.nr;
    opt.n_theta = a.ntheta;
    opt.rho_min = a.rho_min;
    opt.newton.tol = a.newton_tol;
    const auto s = simulate_truncated(a.phi, a.nu, a.R, opt);
    const auto& m = s.mesh;

    io::Table f({"r", "theta", "ur", "utheta"});
    for (std::size_t i = 0; i < m.n_r(); ++i)
        for (std::size_t j = 0; j < m.n_theta(); ++j) {
            const std::size_t n = m.index(i, j);
            f.row(m.rho(i), m.theta(j), s.u_rho(n), s.u_theta(n));
        }
    ctx.write("field.csv", f.str(ctx.config));

    const JHSolution jh = solve_jh(a.phi, 0, ThetaGrid(opt.jh_points));
    const auto jh_fn = perturbed_jh_boundary(jh, 0.0);
    std::vector<double> radii = a.profile_r.empty() ? std::vector<double>{a.R / 2} : a.profile_r;
    json profiles = json::array();
    json files = json::array({"field.csv"});
    for (double r : radii) {
        io::Table p({"theta", "r_ur", "r_utheta"});
        for (const auto& row : profile_on_halfcircle(s, r)) p.row(row.theta, row.r_ur, row.r_utheta);
        const std::string name = "profile_r" + radius_tag(r) + ".csv";
        ctx.write(name, p.str(ctx.config));
        files.push_back(name);
        profiles.push_back({{"r", r}, {"deviation_from_jh", profile_deviation(s, jh_fn, r)}, {"file", name}});
    }
    const double outer = flux_through_arc(s, m.n_r() - 1);
    return {{"residual", s.residual},
            {"newton_iterations", s.newton_iterations},
            {"pseudo_time", s.pseudo_time},
            {"closure_defect", s.closure_defect},
            {"flux_outer_arc", outer},
            {"flux_defect", std::abs(outer - a.phi)},
            {"profiles", profiles},
            {"files", files}};
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
    std::string ns_dir;
    double phi = -0.01;
    int branch = 0;
    std::string fd_field;
    double R = 200.0;
    std::size_t nr = 256;
    std::size_t ntheta = 192;
    double r_min = 5.0;
    double r_max = 50.0;
    std::size_t n = 121;
};

FDSolution read_fd_field(const fs::path& path) {
    const auto d = io::read_csv(path);
    const std::size_t cr = d.column("r"), ct = d.column("theta"), cu = d.column("ur"), cv = d.column("utheta");
    std::vector<double> rs, ts;
    for (const auto& row : d.rows) rs.push_back(row[cr]), ts.push_back(row[ct]);
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    if (rs.size() < 2 || d.rows.size() != rs.size() * ts.size()) throw ValidationError(path.string() + ": not a mesh field");
    const HalfDiskMesh mesh(rs.back(), rs.size(), ts.size(), rs.front());
    for (std::size_t i = 0; i < rs.size(); ++i)
        if (std::abs(mesh.rho(i) - rs[i]) > 1e-9 * rs[i]) throw ValidationError(path.string() + ": radii are not geometric");
    std::vector<double> ux(mesh.size()), uy(mesh.size());
    for (const auto& row : d.rows) {
        const auto i = static_cast<std::size_t>(std::lower_bound(rs.begin(), rs.end(), row[cr]) - rs.begin());
        const auto j = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), row[ct]) - ts.begin());
        const double th = mesh.theta(j);
        ux[mesh.index(i, j)] = row[cu] * std::sin(th) + row[cv] * std::cos(th);
        uy[mesh.index(i, j)] = row[cu] * std::cos(th) - row[cv] * std::sin(th);
    }
    return fd_from_nodal(mesh, std::move(ux), std::move(uy));
}

json run_compare(const CompareArgs& a, const Context& ctx) {
    const fs::path dir(a.ns_dir);
    auto u = io::read_field(dir / "u1_hat.csv");
    auto v = io::read_field(dir / "v1_hat.csv");
    if (u.kgrid.size() != v.kgrid.size() || u.ygrid.size() != v.ygrid.size())
        throw ValidationError("compare: u1 and v1 are sampled on different grids");
    NSSolution s;
    s.jh = solve_jh(a.phi, a.branch, ThetaGrid(1025));
    s.u1 = {std::move(u.field), std::move(v.field)};
    const KGrid& kg = u.kgrid;
    const YGrid& yg = u.ygrid;

    std::optional<FDSolution> fd;
    json fd_info;
    if (!a.fd_field.empty()) {
        fd = read_fd_field(a.fd_field);
        fd_info = {{"source", a.fd_field}};
    } else {
        const HalfDiskMesh mesh(a.R, a.nr, a.ntheta);
        fd = simulate_with_boundary(mesh, matched_boundary(kg, yg, s, a.R), {}, a.phi, 0.0);
        fd_info = {{"source", "matched run"}, {"residual", fd->residual}, {"newton_iterations", fd->newton_iterations},
                   {"closure_defect", fd->closure_defect}};
        io::Table f({"r", "theta", "ur", "utheta"});
        for (std::size_t i = 0; i < mesh.n_r(); ++i)
            for (std::size_t j = 0; j < mesh.n_theta(); ++j) {
                const std::size_t n = mesh.index(i, j);
                f.row(mesh.rho(i), mesh.theta(j), fd->u_rho(n), fd->u_theta(n));
            }
        ctx.write("fd_field.csv", f.str(ctx.config));
    }
    const Window w{a.r_min, a.r_max, a.n};
    const auto spec = spectral_velocity(kg, yg, s);
    const auto jh = perturbed_jh_boundary(s.jh, 0.0);
    return {{"relative_l2", compare(spec, *fd, w)},
            {"perturbation_relative_l2", compare(spec, *fd, w, jh)},
            {"window", {{"r_min", a.r_min}, {"r_max", a.r_max}, {"points", window_points(w).size()}}},
            {"fd", fd_info}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stationary Navier-Stokes in the half-plane: Jeffery-Hamel flows, Stokes and Navier-Stokes solvers, "
                 "and a truncated-domain finite-difference check"};
    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
    Context ctx;
    std::string out = ".";
    app.add_option("--out", out, "Output directory")->capture_default_str();
    app.require_subcommand(1);

    JHSolveArgs js;
    auto* c_js = app.add_subcommand("jh-solve", "Jeffery-Hamel profile for one flux and branch");
    c_js->add_option("--phi", js.phi, "Flux")->required();
    c_js->add_option("--branch", js.branch, "Branch: 0 symmetric, -1/+1 asymmetric (phi < 0)")->capture_default_str();
    c_js->add_option("--n-theta", js.n_theta, "Angular nodes")->capture_default_str();
    c_js->add_option("--tol", js.tol, "Fixed-point tolerance")->capture_default_str();
    c_js->add_option("--max-iter", js.max_iter, "Maximum iterations")->capture_default_str();

    JHScanArgs sc;
    auto* c_sc = app.add_subcommand("jh-scan", "Branch table over a flux interval");
    c_sc->add_option("--phi-min", sc.phi_min)->capture_default_str();
    c_sc->add_option("--phi-max", sc.phi_max)->capture_default_str();
    c_sc->add_option("--n", sc.n, "Number of flux samples")->capture_default_str();
    c_sc->add_option("--n-theta", sc.n_theta)->capture_default_str();

    StokesArgs st;
    auto* c_st = app.add_subcommand("stokes-solve", "Linear Stokes problem with forcing and boundary data");
    c_st->add_option("--alpha", st.alpha)->capture_default_str();
    c_st->add_option("--q", st.q)->capture_default_str();
    c_st->add_option("--kmax", st.kmax)->capture_default_str();
    c_st->add_option("--ymax", st.ymax)->capture_default_str();
    c_st->add_option("--nk", st.nk, "Positive log-spaced modes (0: graded default grid)")->capture_default_str();
    c_st->add_option("--ny", st.ny)->capture_default_str();
    c_st->add_option("--R", st.R, "Forcing R = Q12 (k,y,re,im); sets the grids");
    // Without forcing, the k-grid is that of the trace files.
    c_st->add_option("--S", st.S, "Forcing S = (Q11 - Q22)/2 (k,y,re,im)");
    c_st->add_option("--ustar", st.ustar, "Boundary trace of u (k,re,im)");
    c_st->add_option("--vstar", st.vstar, "Boundary trace of v (k,re,im)");
    c_st->add_option("--tail-tol", st.tail_tol)->capture_default_str();
    c_st->add_option("--compat-tol", st.compat_tol)->capture_default_str();

    NSArgs ns;
    auto* c_ns = app.add_subcommand("ns-solve", "Picard iteration around a Jeffery-Hamel flow");
    c_ns->add_option("--phi", ns.phi)->capture_default_str();
    c_ns->add_option("--branch", ns.branch)->capture_default_str();
    c_ns->add_option("--alpha", ns.alpha)->capture_default_str();
    c_ns->add_option("--q", ns.q)->capture_default_str();
    c_ns->add_option("--tol", ns.tol)->capture_default_str();
    c_ns->add_option("--max-iter", ns.max_iter)->capture_default_str();
    c_ns->add_option("--damping", ns.damping)->capture_default_str();
    c_ns->add_option("--kmax", ns.kmax)->capture_default_str();
    c_ns->add_option("--k-ratio", ns.k_ratio, "Growth ratio of the k-grid near 0")->capture_default_str();
    c_ns->add_option("--dk-max", ns.dk_max, "Largest k spacing")->capture_default_str();
    c_ns->add_option("--ymax", ns.ymax)->capture_default_str();
    c_ns->add_option("--ny", ns.ny)->capture_default_str();
    c_ns->add_option("--trace-u", ns.trace_u, "Perturbation trace of u (k,re,im) on the solver k-grid");
    c_ns->add_option("--trace-v", ns.trace_v, "Perturbation trace of v (k,re,im) on the solver k-grid");
    c_ns->add_option("--perturbation", ns.perturbation, "T-norm of the built-in perturbation c*ik*exp(-k^2/2)")
        ->capture_default_str();
    c_ns->add_option("--conv-tol", ns.conv_tol)->capture_default_str();

    SimArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Finite-difference solve on the truncated half-disk");
    c_sim->add_option("--phi", sim.phi)->capture_default_str();
    c_sim->add_option("--nu", sim.nu)->capture_default_str();
    c_sim->add_option("--R", sim.R)->capture_default_str();
    c_sim->add_option("--nr", sim.nr)->capture_default_str();
    c_sim->add_option("--ntheta", sim.ntheta)->capture_default_str();
    c_sim->add_option("--rho-min", sim.rho_min)->capture_default_str();
    c_sim->add_option("--newton-tol", sim.newton_tol)->capture_default_str();
    c_sim->add_option("--profile-r", sim.profile_r, "Radii of the half-circle profiles (default R/2)");

    NormsArgs nm;
    auto* c_nm = app.add_subcommand("norms", "Weighted norm of a field or trace");
    c_nm->add_option("--field", nm.field, "Field CSV (k,y,re,im)");
    c_nm->add_option("--trace", nm.trace, "Trace CSV (k,re,im)");
    c_nm->add_option("--family", nm.family, "A, T, W, B, U, P or R")->capture_default_str();
    c_nm->add_option("--alpha", nm.alpha)->capture_default_str();
    c_nm->add_option("--q", nm.q)->capture_default_str();

    CompareArgs cp;
    auto* c_cp = app.add_subcommand("compare", "Spectral solution against the finite-difference solver");
    c_cp->add_option("--ns-dir", cp.ns_dir, "Output directory of ns-solve")->required();
    c_cp->add_option("--phi", cp.phi)->capture_default_str();
    c_cp->add_option("--branch", cp.branch)->capture_default_str();
    c_cp->add_option("--fd-field", cp.fd_field, "Field CSV from simulate; without it a matched run is made");
    c_cp->add_option("--R", cp.R)->capture_default_str();
    c_cp->add_option("--nr", cp.nr)->capture_default_str();
    c_cp->add_option("--ntheta", cp.ntheta)->capture_default_str();
    c_cp->add_option("--r-min", cp.r_min)->capture_default_str();
    c_cp->add_option("--r-max", cp.r_max)->capture_default_str();
    c_cp->add_option("--n", cp.n, "Cartesian samples per side")->capture_default_str();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    json summary;
    try {
        const CLI::App* sub = app.get_subcommands().front();
        ctx.out = out;
        ctx.config = active_config(app, *sub);
        const std::string name = sub->get_name();
        if (name == "jh-solve") summary = run_jh_solve(js, ctx);
        else if (name == "jh-scan") summary = run_jh_scan(sc, ctx);
        else if (name == "stokes-solve") summary = run_stokes(st, ctx);
        else if (name == "ns-solve") summary = run_ns(ns, ctx);
        else if (name == "simulate") summary = run_simulate(sim, ctx);
        else if (name == "norms") summary = run_norms(nm);
        else if (name == "compare") summary = run_compare(cp, ctx);
        summary = json{{"command", name}, {"status", "ok"}, {"result", summary}};
        ctx.write("summary.json", summary.dump(2) + "\n");
        std::cout << summary.dump(2) << "\n";
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cout << json{{"status", "invalid"}, {"error", e.what()}}.dump() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cout << json{{"status", "numerical_failure"}, {"error", e.what()}}.dump() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cout << json{{"status", "io_error"}, {"error", e.what()}}.dump() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cout << json{{"status", "io_error"}, {"error", e.what()}}.dump() << "\n";
        return 3;
    }
}
