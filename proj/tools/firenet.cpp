// Command-line front end: sampling-pattern generation, measurement
// simulation, reconstruction, worst-case perturbation search, and the
// breakdown-table demo. Every successful run writes a run.json with the
// fully-resolved configuration next to its primary output; failures print a
// machine-readable {"error": ...} JSON to stdout and exit nonzero.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include <firenet/adversarial.hpp>
#include <firenet/barriers.hpp>
#include <firenet/io.hpp>
#include <firenet/solver.hpp>

using namespace firenet;

namespace {

std::uint64_t resolve_seed(std::uint64_t flag_value, bool flag_given) {
    if (flag_given) return flag_value;
    if (const char* env = std::getenv("FIRENET_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

void write_run_json(const std::string& primary_out, json cfg) {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(primary_out).parent_path();
    if (dir.empty()) dir = ".";
    write_json_file((dir / "run.json").string(), cfg);
}

/// Image input: .pgm files are read as real images scaled to [0, 1]; anything
/// else is treated as a raw complex tensor.
ComplexTensor read_image_any(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".pgm") {
        PgmImage img = read_pgm(path);
        std::vector<std::size_t> dims = img.height == 1
                                            ? std::vector<std::size_t>{img.width}
                                            : std::vector<std::size_t>{img.height, img.width};
        ComplexTensor t(dims);
        for (std::size_t i = 0; i < t.size(); ++i)
            t.data[i] = static_cast<double>(img.pixels[i]) / static_cast<double>(img.maxval);
        return t;
    }
    return read_complex(path);
}

LevelModel load_levels(const std::string& path) {
    return level_model_from_json(read_json_file(path));
}

/// Default level model over the wavelet levels of the grid: all coefficients
/// allowed in the first level, half of each finer level, optimal weights.
LevelModel default_levels(int r, int d) {
    auto M = wavelet_level_bounds(r, d);
    std::vector<std::size_t> s(M.size());
    std::size_t prev = 0;
    for (std::size_t j = 0; j < M.size(); ++j) {
        std::size_t sz = M[j] - prev;
        s[j] = std::max<std::size_t>(1, sz / 2);
        prev = M[j];
    }
    return LevelModel(M, s, optimal_weights(M, s));
}

std::vector<double> resolve_weights(const std::string& spec, const std::string& levels_path,
                                    int r, int d, std::size_t N) {
    std::vector<double> w;
    if (spec == "unit") {
        w.assign(N, 1.0);
    } else if (spec == "optimal") {
        LevelModel lm = levels_path.empty() ? default_levels(r, d) : load_levels(levels_path);
        w = LevelModel(lm.M, lm.s, optimal_weights(lm.M, lm.s)).expanded_weights();
    } else {
        w = load_levels(spec).expanded_weights();  // treat as a LevelModel JSON path
    }
    if (w.size() != N)
        throw std::invalid_argument("weights: expanded size " + std::to_string(w.size()) +
                                    " does not match N = " + std::to_string(N));
    return w;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    if (out.empty()) throw std::invalid_argument("empty integer list");
    return out;
}

struct NormalizedOp {
    LinOp op;           // A / c
    double c = 1.0;     // 1.02 * norm estimate
    double norm_arg;    // norm bound to hand to the solver (<= 1/1.02)
};

/// Rescale the operator so the default unit step sizes satisfy
/// tau * sigma * ||A||^2 < 1. Solving with (A/c, y/c, lambda/c) leaves the
/// minimiser unchanged; objective values are reported times c.
NormalizedOp normalize_op(const LinOp& A, std::uint64_t seed) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    auto nr = operator_norm(A, 1e-10, 2000, rng);
    double est = nr.safe_upper();
    if (!(est > 0)) est = 1.0;
    NormalizedOp out;
    out.c = 1.02 * est;
    double c = out.c;
    out.op = LinOp{A.n_in, A.n_out,
                   [A, c](const CVec& x) { return scaled(A.apply(x), 1.0 / c); },
                   [A, c](const CVec& y) { return scaled(A.apply_adj(y), 1.0 / c); }};
    out.norm_arg = est / out.c;
    return out;
}

json solver_flags_json(const SolverConfig& cfg, const std::string& weights_spec) {
    return json{{"lambda", cfg.lambda}, {"tau", cfg.tau},     {"sigma", cfg.sigma},
                {"p", cfg.p},           {"n", cfg.n},         {"delta", cfg.delta},
                {"eps0", cfg.eps0},     {"upsilon", cfg.upsilon}, {"weights", weights_spec}};
}

// ------------------------------------------------------------- commands ----

int cmd_pattern(const std::string& kind_s, int r, int d, const std::string& levels_path,
                double fraction, double eps_p, std::uint64_t seed, const std::string& out) {
    TransformKind kind = kind_s == "fourier" ? TransformKind::Fourier : TransformKind::Walsh;
    BandStructure bs = build_bands(kind, r, d);
    std::vector<std::size_t> m_per_band;
    if (fraction >= 1.0) {
        for (const auto& band : bs.bands) m_per_band.push_back(band.size());
    } else {
        LevelModel lm = levels_path.empty() ? default_levels(r, d) : load_levels(levels_path);
        if (lm.r() != static_cast<std::size_t>(r))
            throw std::invalid_argument("pattern: level count must equal r");
        m_per_band = allocation_for_fraction(lm, kind, d, eps_p, fraction);
    }
    SamplingScheme sc = draw_scheme(bs, m_per_band, seed);
    write_json_file(out, scheme_to_json(sc));
    std::string mask_path;
    if (d == 2) {
        mask_path = out + ".mask.pgm";
        scheme_mask_pgm(mask_path, sc);
    }
    double achieved = static_cast<double>(sc.m()) / static_cast<double>(sc.N());
    write_run_json(out, json{{"command", "pattern"},
                             {"kind", kind_s},
                             {"r", r},
                             {"d", d},
                             {"levels", levels_path},
                             {"fraction", fraction},
                             {"eps_p", eps_p},
                             {"seed", seed},
                             {"out", out},
                             {"mask", mask_path},
                             {"achieved_fraction", achieved},
                             {"m_total", sc.m()}});
    std::cout << json{{"m_total", sc.m()}, {"achieved_fraction", achieved}}.dump() << "\n";
    return 0;
}

int cmd_measure(const std::string& image_path, const std::string& scheme_path, double noise,
                std::uint64_t seed, const std::string& out) {
    if (noise < 0) throw std::invalid_argument("measure: noise must be >= 0");
    SamplingScheme sc = scheme_from_json(read_json_file(scheme_path));
    ComplexTensor img = read_image_any(image_path);
    MeasurementOperator op{sc, OperatorDomain::Image};
    if (img.size() != op.N()) throw std::invalid_argument("measure: image/scheme size mismatch");
    CVec y = op.forward(img.data);
    double nAx = norm_l2(y);
    if (noise > 0 && nAx > 0) {
        Rng rng(seed);
        CVec e(y.size());
        for (auto& v : e) v = rng.cnormal();
        double ne = norm_l2(e);
        double target = noise * nAx;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += (target / ne) * e[i];
    }
    write_complex_vec(out, y);
    write_run_json(out, json{{"command", "measure"},
                             {"image", image_path},
                             {"scheme", scheme_path},
                             {"noise", noise},
                             {"seed", seed},
                             {"out", out},
                             {"norm_Ax", nAx}});
    return 0;
}

int cmd_reconstruct(const std::string& meas_path, const std::string& scheme_path,
                    SolverConfig cfg, const std::string& weights_spec,
                    const std::string& levels_path, std::uint64_t seed,
                    const std::string& out_prefix) {
    SamplingScheme sc = scheme_from_json(read_json_file(scheme_path));
    CVec y = read_complex_vec(meas_path);
    MeasurementOperator op{sc, OperatorDomain::WaveletCoeffs};
    if (y.size() != op.m())
        throw std::invalid_argument("reconstruct: measurement/scheme size mismatch");
    cfg.w = resolve_weights(weights_spec, levels_path, sc.r, sc.d, op.N());

    NormalizedOp no = normalize_op(op.as_linop(), seed);
    SolverConfig scfg = cfg;
    scfg.lambda = cfg.lambda / no.c;
    // eps0 is an x-space error bound; x is not rescaled by the operator
    // normalization, so default it to the unscaled measurement norm
    if (scfg.eps0 < 0) scfg.eps0 = norm_l2(y);
    CVec ys = scaled(y, 1.0 / no.c);
    SolveResult res = firenet_solve(ys, no.op, no.norm_arg, scfg, nullptr, nullptr,
                                    std::numeric_limits<double>::quiet_NaN(), nullptr, no.c);

    ComplexTensor coeffs(op.tensor_dims(), res.x);
    ComplexTensor img = haar_idwt(coeffs, sc.r);
    double scale = magnitude_to_pgm(out_prefix + ".pgm", img);
    write_complex(out_prefix + ".fncx", img);
    write_complex(out_prefix + ".coeffs.fncx", coeffs);
    {
        std::ofstream os(out_prefix + ".trace.csv");
        res.trace.write_csv(os);
    }
    json jcfg = solver_flags_json(cfg, weights_spec);
    jcfg["command"] = "reconstruct";
    jcfg["measurements"] = meas_path;
    jcfg["scheme"] = scheme_path;
    jcfg["levels"] = levels_path;
    jcfg["seed"] = seed;
    jcfg["out"] = out_prefix;
    jcfg["pgm_scale"] = scale;
    jcfg["operator_rescale"] = no.c;
    write_run_json(out_prefix + ".pgm", jcfg);
    return 0;
}

int cmd_adversarial(const std::string& image_path, const std::string& scheme_path,
                    SolverConfig cfg, const std::string& weights_spec,
                    const std::string& levels_path, AttackConfig acfg, std::uint64_t seed,
                    const std::string& out_prefix) {
    SamplingScheme sc = scheme_from_json(read_json_file(scheme_path));
    ComplexTensor img = read_image_any(image_path);
    MeasurementOperator op_img{sc, OperatorDomain::Image};
    MeasurementOperator op_coef{sc, OperatorDomain::WaveletCoeffs};
    if (img.size() != op_img.N())
        throw std::invalid_argument("adversarial: image/scheme size mismatch");
    cfg.w = resolve_weights(weights_spec, levels_path, sc.r, sc.d, op_coef.N());
    acfg.seed = seed;

    NormalizedOp no = normalize_op(op_coef.as_linop(), seed);
    SolverConfig scfg = cfg;
    scfg.lambda = cfg.lambda / no.c;
    if (scfg.eps0 < 0) {
        // freeze the restart schedule at the clean-measurement scale so the
        // map stays differentiable in y; eps0 is an x-space error bound and
        // is not reduced by the operator normalization
        scfg.eps0 = norm_l2(op_img.forward(img.data));
    }
    auto dims = op_coef.tensor_dims();
    int r = sc.r;
    double c = no.c;
    LinOp As = no.op;
    double norm_arg = no.norm_arg;
    auto tape = std::make_shared<SolveTape>();
    ReconMap rm;
    rm.apply = [As, norm_arg, scfg, c, dims, r, tape](const CVec& y) {
        CVec x = firenet_solve(scaled(y, 1.0 / c), As, norm_arg, scfg, nullptr, nullptr,
                               std::numeric_limits<double>::quiet_NaN(), tape.get(), 1.0, false)
                     .x;
        return haar_idwt(ComplexTensor(dims, x), r).data;
    };
    rm.vjp = [As, c, dims, r, tape](const CVec&, const CVec& xbar) {
        CVec cb = haar_dwt(ComplexTensor(dims, xbar), r).data;
        return scaled(firenet_vjp(*tape, As, cb), 1.0 / c);
    };

    LinOp Aimg = op_img.as_linop();
    PerturbationReport rep = perturbation_search(rm, Aimg, img.data, acfg);

    ComplexTensor rimg(dims, rep.r_star);
    magnitude_to_pgm(out_prefix + ".r.pgm", rimg);
    write_complex(out_prefix + ".r.fncx", rimg);
    CVec y0 = Aimg.apply(img.data);
    CVec Ar = Aimg.apply(rep.r_star);
    CVec yr(y0.size());
    for (std::size_t i = 0; i < y0.size(); ++i) yr[i] = y0[i] + Ar[i];
    ComplexTensor rec(dims, rm.apply(yr));
    ComplexTensor rec0(dims, rm.apply(y0));
    magnitude_to_pgm(out_prefix + ".recon.pgm", rec);
    magnitude_to_pgm(out_prefix + ".recon0.pgm", rec0);
    {
        std::ofstream os(out_prefix + ".qtrace.csv");
        os << "step,Q\n";
        os.precision(17);
        for (std::size_t i = 0; i < rep.q_trace.size(); ++i)
            os << i << ',' << rep.q_trace[i] << '\n';
    }
    json jrep{{"Q_value", rep.Q_value},
              {"norm_r", rep.norm_r},
              {"norm_Ar", rep.norm_Ar},
              {"norm_recon_shift", rep.norm_recon_shift},
              {"norm_damage", rep.norm_damage},
              {"baseline_error", rep.baseline_error},
              {"best_restart", rep.best_restart}};
    write_json_file(out_prefix + ".report.json", jrep);
    json jcfg = solver_flags_json(cfg, weights_spec);
    jcfg["command"] = "adversarial";
    jcfg["image"] = image_path;
    jcfg["scheme"] = scheme_path;
    jcfg["levels"] = levels_path;
    jcfg["seed"] = seed;
    jcfg["out"] = out_prefix;
    jcfg["pen"] = acfg.lambda_pen;
    jcfg["momentum"] = acfg.gamma_mom;
    jcfg["eta"] = acfg.eta;
    jcfg["steps"] = acfg.steps;
    jcfg["restarts"] = acfg.restarts;
    jcfg["mode"] = acfg.gradient_mode == GradientMode::Backprop ? "backprop" : "fd";
    jcfg["init_frac"] = acfg.init_norm_frac;
    jcfg["operator_rescale"] = no.c;
    write_run_json(out_prefix + ".report.json", jcfg);
    std::cout << jrep.dump() << "\n";
    return 0;
}

int cmd_barrier(const std::string& K_s, const std::string& n_s, int inner, bool plus_sign,
                const std::string& out) {
    auto K_list = parse_int_list(K_s);
    auto n_list = parse_int_list(n_s);
    auto rows = breakdown_table(K_list, n_list, inner, plus_sign);
    {
        std::ofstream os(out);
        write_breakdown_csv(os, rows);
    }
    write_run_json(out, json{{"command", "barrier"},
                             {"K", K_s},
                             {"n", n_s},
                             {"inner", inner},
                             {"plus_sign", plus_sign},
                             {"out", out}});
    for (const auto& r : rows)
        std::cout << json{{"K", r.K}, {"n", r.n}, {"dist", r.dist}, {"pass", r.pass}}.dump()
                  << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse-recovery toolkit: multilevel sampling patterns, measurement "
                 "simulation, restarted primal-dual reconstruction, worst-case "
                 "perturbation search, and the accuracy-barrier demo."};
    app.require_subcommand(1);

    // pattern
    auto* pat = app.add_subcommand("pattern", "Generate a multilevel sampling scheme");
    std::string p_kind = "fourier", p_levels, p_out;
    int p_r = 3, p_d = 1;
    double p_fraction = 1.0, p_epsp = 0.01;
    std::uint64_t p_seed = 0;
    pat->add_option("--kind", p_kind)->check(CLI::IsMember({"fourier", "walsh"}));
    pat->add_option("--r", p_r)->required();
    pat->add_option("--d", p_d)->check(CLI::IsMember({1, 2}));
    pat->add_option("--levels", p_levels);
    pat->add_option("--fraction", p_fraction);
    pat->add_option("--eps-p", p_epsp);
    auto* p_seed_opt = pat->add_option("--seed", p_seed);
    pat->add_option("--out", p_out)->required();

    // measure
    auto* mea = app.add_subcommand("measure", "Simulate noisy measurements y = A x + e");
    std::string m_image, m_scheme, m_out;
    double m_noise = 0.0;
    std::uint64_t m_seed = 0;
    mea->add_option("--image", m_image)->required();
    mea->add_option("--scheme", m_scheme)->required();
    mea->add_option("--noise", m_noise);
    auto* m_seed_opt = mea->add_option("--seed", m_seed);
    mea->add_option("--out", m_out)->required();

    // shared solver flags
    auto add_solver_flags = [](CLI::App* cmd, SolverConfig& cfg, std::string& weights,
                               std::string& levels) {
        cmd->add_option("--lambda", cfg.lambda);
        cmd->add_option("--tau", cfg.tau);
        cmd->add_option("--sigma", cfg.sigma);
        cmd->add_option("--p", cfg.p);
        cmd->add_option("--n", cfg.n);
        cmd->add_option("--delta", cfg.delta);
        cmd->add_option("--eps0", cfg.eps0);
        cmd->add_option("--upsilon", cfg.upsilon);
        cmd->add_option("--weights", weights);
        cmd->add_option("--levels", levels);
    };

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "Run the restarted solver on measurements");
    std::string r_meas, r_scheme, r_weights = "unit", r_levels, r_out;
    SolverConfig r_cfg;
    std::uint64_t r_seed = 0;
    rec->add_option("--measurements", r_meas)->required();
    rec->add_option("--scheme", r_scheme)->required();
    add_solver_flags(rec, r_cfg, r_weights, r_levels);
    auto* r_seed_opt = rec->add_option("--seed", r_seed);
    rec->add_option("--out", r_out)->required();

    // adversarial
    auto* adv = app.add_subcommand("adversarial", "Worst-case perturbation search");
    std::string a_image, a_scheme, a_weights = "unit", a_levels, a_out, a_mode = "backprop";
    SolverConfig a_cfg;
    AttackConfig a_acfg;
    std::uint64_t a_seed = 0;
    adv->add_option("--image", a_image)->required();
    adv->add_option("--scheme", a_scheme)->required();
    add_solver_flags(adv, a_cfg, a_weights, a_levels);
    adv->add_option("--pen", a_acfg.lambda_pen);
    adv->add_option("--momentum", a_acfg.gamma_mom);
    adv->add_option("--eta", a_acfg.eta);
    adv->add_option("--steps", a_acfg.steps);
    adv->add_option("--restarts", a_acfg.restarts);
    adv->add_option("--init-frac", a_acfg.init_norm_frac);
    adv->add_option("--mode", a_mode)->check(CLI::IsMember({"backprop", "fd"}));
    auto* a_seed_opt = adv->add_option("--seed", a_seed);
    adv->add_option("--out", a_out)->required();

    // barrier
    auto* bar = app.add_subcommand("barrier", "Accuracy-barrier breakdown table");
    std::string b_K = "1,3,6", b_n = "10,20,30", b_out;
    int b_inner = 4000;
    bool b_plus = false;
    bar->add_option("--K", b_K);
    bar->add_option("--n", b_n);
    bar->add_option("--inner", b_inner);
    bar->add_flag("--plus-sign", b_plus);
    bar->add_option("--out", b_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cout << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }

    try {
        if (pat->parsed())
            return cmd_pattern(p_kind, p_r, p_d, p_levels, p_fraction, p_epsp,
                               resolve_seed(p_seed, p_seed_opt->count() > 0), p_out);
        if (mea->parsed())
            return cmd_measure(m_image, m_scheme, m_noise,
                               resolve_seed(m_seed, m_seed_opt->count() > 0), m_out);
        if (rec->parsed())
            return cmd_reconstruct(r_meas, r_scheme, r_cfg, r_weights, r_levels,
                                   resolve_seed(r_seed, r_seed_opt->count() > 0), r_out);
        if (adv->parsed()) {
            a_acfg.gradient_mode =
                a_mode == "backprop" ? GradientMode::Backprop : GradientMode::FiniteDiff;
            return cmd_adversarial(a_image, a_scheme, a_cfg, a_weights, a_levels, a_acfg,
                                   resolve_seed(a_seed, a_seed_opt->count() > 0), a_out);
        }
        if (bar->parsed()) return cmd_barrier(b_K, b_n, b_inner, b_plus, b_out);
    } catch (const std::exception& e) {
        std::cout << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    std::cout << json{{"error", "no subcommand"}}.dump() << "\n";
    return 1;
}
