#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dspstab/config.hpp"
#include "dspstab/green.hpp"
#include "dspstab/linop.hpp"
#include "dspstab/profile.hpp"
#include "dspstab/report.hpp"
#include "dspstab/scheme.hpp"
#include "dspstab/seqcore.hpp"
#include "dspstab/stability.hpp"

namespace fs = std::filesystem;
using namespace dspstab;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitVerdictFail = 2;

struct Pipeline {
    RunConfig cfg;
    SchemeSpec scheme;
    ShockPair shock;
};

Pipeline build_pipeline(const RunConfig& cfg) {
    Pipeline p;
    p.cfg = cfg;
    if (cfg.scheme != "mlf") throw std::runtime_error("unsupported scheme: " + cfg.scheme);
    if (cfg.flux != "burgers") throw std::runtime_error("unsupported flux: " + cfg.flux);
    p.scheme = make_mlf(cfg.nu, cfg.D, burgers_flux(), burgers_flux_derivative(), cfg.state_lo,
                        cfg.state_hi);
    p.shock = shock_pair(p.scheme, cfg.u_minus, cfg.u_plus);
    return p;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_text_file(dir / "effective_config.ini", render_config(cfg));
    return dir;
}

std::vector<double> config_delta_grid(const RunConfig& cfg) {
    auto grid = default_delta_grid(cfg.delta_grid, cfg.delta_min, cfg.delta_max);
    // the eigenvector routes need the +-0.0625 members
    for (double extra : {-0.0625, 0.0625}) {
        bool found = false;
        for (double d : grid) found |= std::abs(d - extra) <= 1e-12;
        if (!found) grid.push_back(extra);
    }
    std::sort(grid.begin(), grid.end());
    return grid;
}

ProfileFamily solve_core_family(const Pipeline& p) {
    return solve_family(p.scheme, p.shock, {-0.0625, 0.0, 0.0625}, p.cfg.half_width, p.cfg.tol);
}

int cmd_hypotheses(const Pipeline& p) {
    const fs::path dir = prepare_out_dir(p.cfg);
    TextTable table;

    const auto cons = check_consistency(p.scheme);
    table.add("consistency", cons.pass, "max residual " + fmt_g17(cons.worst_value));
    const auto cfl = check_cfl(p.scheme);
    table.add("cfl", cfl.pass, "min margin " + fmt_g17(cfl.worst_value));
    table.add("rankine-hugoniot", std::abs(p.shock.rh_residual) <= 1e-12,
              "residual " + fmt_g17(p.shock.rh_residual));
    table.add("lax", p.shock.lax_ok,
              "f'(u-) = " + fmt_g17(p.scheme.flux_derivative(p.shock.u_minus)) +
                  ", f'(u+) = " + fmt_g17(p.scheme.flux_derivative(p.shock.u_plus)));

    SymbolData sym_m = limit_symbol(p.scheme, p.shock.u_minus, Side::left);
    SymbolData sym_p = limit_symbol(p.scheme, p.shock.u_plus, Side::right);
    const auto diss_m = check_dissipativity(sym_m);
    const auto diss_p = check_dissipativity(sym_p);
    table.add("dissipativity-", diss_m.pass, "max |F| off arc " + fmt_g17(diss_m.max_modulus_off_arc));
    table.add("dissipativity+", diss_p.pass, "max |F| off arc " + fmt_g17(diss_p.max_modulus_off_arc));
    std::string diff_detail_m = "not diffusive", diff_detail_p = "not diffusive";
    bool diff_ok = true;
    try {
        const auto dm = extract_diffusion(sym_m);
        diff_detail_m = "mu = " + std::to_string(dm.mu) + ", beta = " + fmt_g17(dm.beta.real());
    } catch (const std::exception&) {
        diff_ok = false;
    }
    table.add("diffusivity-", diff_ok && sym_m.mu > 0, diff_detail_m);
    bool diff_ok_p = true;
    try {
        const auto dp = extract_diffusion(sym_p);
        diff_detail_p = "mu = " + std::to_string(dp.mu) + ", beta = " + fmt_g17(dp.beta.real());
    } catch (const std::exception&) {
        diff_ok_p = false;
    }
    table.add("diffusivity+", diff_ok_p && sym_p.mu > 0, diff_detail_p);

    const ProfileFamily fam = solve_core_family(p);
    const BandedOp op = linearize(p.scheme, fam.reference());
    const auto inv = check_hyp_inv(op);
    table.add("hyp8-band-edges", inv.pass, "min |band edge| " + fmt_g17(inv.min_band_edge));

    bool hyp9 = true;
    std::string hyp9_detail;
    for (SymbolData* sym : {&sym_m, &sym_p}) {
        const auto roots = count_unit_roots(*sym);
        const bool distinct = unit_roots_distinct(roots);
        hyp9 = hyp9 && distinct && roots.size() == static_cast<std::size_t>(sym->p + sym->q);
        hyp9_detail += (sym->side == Side::left ? "left: " : "right: ") +
                       std::to_string(roots.size()) + (distinct ? " distinct; " : " NOT distinct; ");
    }
    table.add("hyp9-unit-roots", hyp9, hyp9_detail);

    const EigenV v = eigenvector_v(op, fam, p.cfg.half_width);
    const double probe = spectral_probe(op, v.seq, p.cfg.half_width);
    table.add("spectral-probe", probe < 1.0, "dominant modulus estimate " + fmt_g17(probe));

    table.print(std::cout);
    std::ostringstream csv;
    table.write_csv(csv);
    write_text_file(dir / "hypotheses.csv", csv.str());
    return table.all_pass() ? kExitPass : kExitVerdictFail;
}

int cmd_profile(const Pipeline& p) {
    const fs::path dir = prepare_out_dir(p.cfg);
    const ProfileFamily fam =
        solve_family(p.scheme, p.shock, config_delta_grid(p.cfg), p.cfg.half_width, p.cfg.tol);

    std::ostringstream manifest;
    CsvWriter mw(manifest);
    mw.header({"delta", "mass", "residual", "iterations"});
    bool monotone = true;
    double prev_mass = -1e300;
    for (const auto& m : fam.members) {
        const double mm = mass(diff_seq(m.seq, fam.reference().seq));
        mw.row(m.delta, mm, m.residual, static_cast<std::int64_t>(m.iterations));
        if (mm <= prev_mass) monotone = false;
        prev_mass = mm;
        std::ostringstream seq_csv;
        write_seq_csv(seq_csv, m.seq);
        std::ostringstream name;
        name << "profile_delta_" << fmt_fixed(m.delta, 4) << ".csv";
        write_text_file(dir / name.str(), seq_csv.str());
    }
    write_text_file(dir / "family.csv", manifest.str());

    const auto rates = localization_rates(fam.reference());
    TextTable table;
    table.add("family-solved", true, std::to_string(fam.members.size()) + " members");
    table.add("mass-monotone", monotone, "injectivity surrogate over the delta grid");
    table.add("localization", rates.exponential_left && rates.exponential_right,
              "rates " + fmt_fixed(rates.rate_left, 4) + " / " + fmt_fixed(rates.rate_right, 4));
    const auto lip = family_lipschitz_check(fam);
    table.add("family-lipschitz", lip.pass,
              "sup ratio " + fmt_fixed(lip.max_ratio, 4) + ", fitted c " + fmt_fixed(lip.fitted_c, 4));
    table.print(std::cout);
    return table.all_pass() ? kExitPass : kExitVerdictFail;
}

int cmd_green(const Pipeline& p, std::int64_t n, std::int64_t j0, bool decompose,
              const std::string& csv_override) {
    const fs::path dir = prepare_out_dir(p.cfg);
    const ProfileFamily fam = solve_core_family(p);
    const BandedOp op = linearize(p.scheme, fam.reference());
    const GreenColumn col = green_column(op, n, j0);

    TailedSeq leading;
    double e_factor = 0.0;
    if (decompose) {
        const EigenV v = eigenvector_v(op, fam, p.cfg.half_width);
        SymbolData sym = limit_symbol(p.scheme, j0 >= 0 ? p.shock.u_plus : p.shock.u_minus,
                                      j0 >= 0 ? Side::right : Side::left);
        extract_diffusion(sym);
        e_factor = e2mu(KernelSpec{sym.mu, sym.beta}, activation_argument(sym, n, j0));
        leading = scale_seq(v.seq, e_factor);
    }

    std::ostringstream os;
    CsvWriter w(os);
    w.header({"n", "j0", "j", "green", "leading_term", "residual"});
    const std::int64_t lo = std::min(col.seq.lo(), decompose ? leading.lo() : col.seq.lo());
    const std::int64_t hi = std::max(col.seq.hi(), decompose ? leading.hi() : col.seq.hi());
    for (std::int64_t j = lo; j <= hi; ++j) {
        const double g = col.seq.at(j);
        const double lead = decompose ? leading.at(j) : 0.0;
        w.row(n, j0, j, g, lead, g - lead);
    }
    const fs::path csv_path = csv_override.empty() ? dir / "green.csv" : fs::path(csv_override);
    write_text_file(csv_path, os.str());

    TextTable table;
    table.add("green-mass", col.mass_error <= 1e-12 * (1.0 + static_cast<double>(n)),
              "|sum - 1| = " + fmt_g17(col.mass_error));
    table.add("green-support", col.support_ok, "finite-speed support bound");
    if (decompose) table.add("activation", true, "E factor " + fmt_g17(e_factor));
    table.print(std::cout);
    std::cout << "  wrote " << csv_path.string() << "\n";
    return table.all_pass() ? kExitPass : kExitVerdictFail;
}

int cmd_experiment(const Pipeline& p) {
    const fs::path dir = prepare_out_dir(p.cfg);
    SymbolData sym = limit_symbol(p.scheme, p.shock.u_plus, Side::right);
    extract_diffusion(sym);
    const DecayParams dp = preset(p.cfg.choice, p.cfg.p, sym.mu);

    const ProfileFamily fam = solve_core_family(p);
    std::vector<std::int64_t> J_list;
    for (std::int64_t J = 1; J <= p.cfg.j_max; ++J) J_list.push_back(J);
    ExperimentOptions opt;
    opt.n_max = p.cfg.n_max;
    opt.fit_lo = p.cfg.fit_lo;
    opt.fit_hi = p.cfg.fit_hi;
    const ExperimentReport rep = run_experiment(p.scheme, fam, dp, J_list, opt);

    // norms.csv: n,J,l1_norm,linf_norm
    std::ostringstream norms;
    CsvWriter nw(norms);
    nw.header({"n", "J", "l1_norm", "linf_norm"});
    for (std::size_t ji = 0; ji < rep.J_list.size(); ++ji)
        for (std::size_t k = 0; k < rep.n_list.size(); ++k)
            nw.row(rep.n_list[k], rep.J_list[ji], rep.l1_norms[ji][k], rep.linf_norms[ji][k]);
    write_text_file(dir / "norms.csv", norms.str());

    std::ostringstream env;
    CsvWriter ew(env);
    ew.header({"n", "log_env_l1", "log_env_linf"});
    for (std::size_t k = 0; k < rep.n_list.size(); ++k)
        ew.row(rep.n_list[k], rep.log_env_l1[k], rep.log_env_linf[k]);
    write_text_file(dir / "envelope.csv", env.str());

    std::ostringstream slopes;
    CsvWriter sw(slopes);
    sw.header({"norm", "fitted", "target", "verdict"});
    sw.row("l1", rep.slope_l1.fitted, rep.slope_l1.target, rep.slope_l1.pass ? "pass" : "fail");
    sw.row("linf", rep.slope_linf.fitted, rep.slope_linf.target,
           rep.slope_linf.pass ? "pass" : "fail");
    write_text_file(dir / "slopes.csv", slopes.str());

    if (p.cfg.formats.find("svg") != std::string::npos) {
        auto make_plot = [&](const std::vector<double>& envelope, const ExperimentSlopes& sl,
                             const std::string& norm_name) {
            SvgSeries data;
            data.label = "envelope";
            for (std::size_t k = 0; k < rep.n_list.size(); ++k) {
                if (!std::isfinite(envelope[k])) continue;
                data.x.push_back(std::log(static_cast<double>(rep.n_list[k])));
                data.y.push_back(envelope[k]);
            }
            SvgSeries refline;
            refline.color = "#c23b22";
            refline.label = "target slope " + fmt_fixed(sl.target, 2);
            const double x0 = std::log(static_cast<double>(rep.fit_lo));
            const double x1 = std::log(static_cast<double>(rep.fit_hi));
            const double y0 = envelope[static_cast<std::size_t>(rep.fit_lo - 1)];
            refline.x = {x0, x1};
            refline.y = {y0, y0 + sl.target * (x1 - x0)};
            return render_svg_loglog({data, refline}, "weighted-norm envelope (" + norm_name + ")",
                                     "log n", "log envelope");
        };
        write_text_file(dir / "envelope_l1.svg",
                        make_plot(rep.log_env_l1, rep.slope_l1, "l1 gamma=" + fmt_fixed(dp.gamma1, 2)));
        write_text_file(dir / "envelope_linf.svg",
                        make_plot(rep.log_env_linf, rep.slope_linf,
                                  "linf gamma=" + fmt_fixed(dp.gamma_inf, 2)));
    }

    TextTable table;
    table.add("slope-l1", rep.slope_l1.pass,
              "fitted " + fmt_fixed(rep.slope_l1.fitted, 6) + " vs target " +
                  fmt_fixed(rep.slope_l1.target, 2) + " (+" + fmt_fixed(rep.slope_l1.slack, 2) + ")");
    table.add("slope-linf", rep.slope_linf.pass,
              "fitted " + fmt_fixed(rep.slope_linf.fitted, 6) + " vs target " +
                  fmt_fixed(rep.slope_linf.target, 2) + " (+" + fmt_fixed(rep.slope_linf.slack, 2) +
                  ")");
    table.add("mass-conservation", rep.max_mass_drift_ratio <= 1e-10,
              "max drift ratio " + fmt_g17(rep.max_mass_drift_ratio));
    table.print(std::cout);
    std::cout << "  fit window n in [" << rep.fit_lo << ", " << rep.fit_hi << "]\n";
    return table.all_pass() ? kExitPass : kExitVerdictFail;
}

int cmd_bounds(const Pipeline& p) {
    prepare_out_dir(p.cfg);
    TextTable table;

    const struct {
        double a, b, c;
    } triplets[] = {{2.0, 2.0, 2.0}, {1.0, 2.0, 1.0}, {0.5, 1.0, 0.5}, {0.3, 1.2, 0.5}, {2.5, 0.5, 0.5}};
    for (const auto& t : triplets) {
        const auto rep = insum_bound_check(t.a, t.b, t.c, 10000);
        std::ostringstream name;
        name << "insum(" << t.a << "," << t.b << "," << t.c << ")";
        table.add(name.str(), rep.pass,
                  "sup " + fmt_fixed(rep.sup, 6) + ", growth " + fmt_g17(rep.relative_growth));
    }

    const ProfileFamily fam = solve_family(p.scheme, p.shock, {-0.0625, 0.0, 0.0625, 0.25},
                                           p.cfg.half_width, p.cfg.tol);
    const auto inq = check_inq_bounds(p.scheme, fam.reference(), 1.0, 1.5, 100, p.cfg.seed);
    table.add("inq-ratios", inq.pass,
              "l1 " + fmt_fixed(inq.max_ratio_l1, 4) + ", linf " + fmt_fixed(inq.max_ratio_linf, 4));

    // quadratic-remainder identity over seeded perturbations
    const BandedOp op = linearize(p.scheme, fam.reference());
    Rng rng(p.cfg.seed);
    double worst = 0.0;
    const double R = state_margin(p.scheme, fam.reference());
    for (int t = 0; t < 100; ++t) {
        TailedSeq h;
        h.offset = -20;
        h.values.assign(41, 0.0);
        for (auto& v : h.values) v = rng.uniform(-R / 4.0, R / 4.0);
        worst = std::max(worst, decomposition_identity_residual(p.scheme, fam.reference(), op, h));
    }
    table.add("q-identity", worst <= 1e-12, "max residual " + fmt_g17(worst));

    TailedSeq h_small;
    h_small.offset = 0;
    h_small.values = {-1e-3, 1e-3};
    for (double delta : {0.0, 0.25}) {
        const auto du = duhamel_check(p.scheme, fam, delta, h_small, 50);
        table.add("duhamel(delta=" + fmt_fixed(delta, 2) + ")", du.residual <= 1e-10,
                  "residual " + fmt_g17(du.residual));
    }

    table.print(std::cout);
    return table.all_pass() ? kExitPass : kExitVerdictFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stationary discrete shock profile stability toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::int64_t green_n = 400;
    std::int64_t green_j0 = 0;
    bool green_decompose = false;
    std::string green_csv;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "path to the run configuration")->required();
        cmd->add_option("--out", out_override, "output directory override");
    };
    CLI::App* c_hyp = app.add_subcommand("hypotheses", "scheme and shock hypothesis suite");
    add_common(c_hyp);
    CLI::App* c_prof = app.add_subcommand("profile", "solve the profile family");
    add_common(c_prof);
    CLI::App* c_green = app.add_subcommand("green", "Green's function of the linearization");
    add_common(c_green);
    c_green->add_option("--n", green_n, "time step");
    c_green->add_option("--j0", green_j0, "source index");
    c_green->add_flag("--decompose", green_decompose, "emit the leading-term decomposition");
    c_green->add_option("--csv", green_csv, "CSV output path override");
    CLI::App* c_exp = app.add_subcommand("experiment", "nonlinear stability experiment");
    add_common(c_exp);
    CLI::App* c_bounds = app.add_subcommand("bounds", "identity and bound check suites");
    add_common(c_bounds);

    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot read config: " + config_path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        RunConfig cfg = parse_config(buffer.str());
        if (!out_override.empty()) cfg.out_dir = out_override;
        const Pipeline p = build_pipeline(cfg);

        if (c_hyp->parsed()) return cmd_hypotheses(p);
        if (c_prof->parsed()) return cmd_profile(p);
        if (c_green->parsed()) return cmd_green(p, green_n, green_j0, green_decompose, green_csv);
        if (c_exp->parsed()) return cmd_experiment(p);
        if (c_bounds->parsed()) return cmd_bounds(p);
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
