#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "berryphase/berry.hpp"
#include "berryphase/config.hpp"
#include "berryphase/report.hpp"
#include "berryphase/sweep.hpp"
#include "berryphase/twolevel.hpp"

namespace bp = berryphase;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kScf = 3, kResolution = 4, kPartial = 5 };

// Flags shared by path, gap-profile and sweep. Each flag is stored as text and
// replayed through RunConfig::set_key after the config file, in this order.
struct CommonFlags {
    std::string config;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> values;
    std::vector<std::pair<std::string, CLI::Option*>> options;

    void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        values.emplace_back(key, std::string{});
        options.emplace_back(key, app->add_option(flag, values.back().second, help));
    }

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config, "key = value config file")->check(CLI::ExistingFile);
        app->add_option("--set", sets, "override any config key (KEY=VALUE), repeatable");
        values.reserve(32);
        bind(app, "--U", "U", "on-site repulsion in units of t");
        bind(app, "--g", "g", "hole-phonon coupling");
        bind(app, "--d", "d", "breathing amplitude");
        bind(app, "--K", "K", "spring constant");
        bind(app, "--t", "t", "hopping");
        bind(app, "--mode", "mode", "collinear | noncollinear");
        bind(app, "--path", "path", "catalog name or JSON list of [x, y] sites");
        bind(app, "--ns", "steps_per_segment", "samples per segment");
        bind(app, "--scf-tol", "scf_tol", "SCF density tolerance");
        bind(app, "--scf-max-iter", "scf_max_iter", "SCF iteration limit");
        bind(app, "--scf-mixing", "scf_mixing", "linear mixing fraction");
        bind(app, "--threshold", "degeneracy_fraction", "degeneracy threshold as a fraction of the max gap");
        bind(app, "-o,--output", "output", "output file (default: stdout)");
        bind(app, "--format", "format", "csv | json");
    }

    bp::RunConfig resolve() const {
        bp::RunConfig cfg = config.empty() ? bp::RunConfig{} : bp::load_config(config);
        for (const std::string& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw bp::InputError("--set expects KEY=VALUE, got '" + s + "'");
            cfg.set_key(bp::detail::trim(s.substr(0, eq)), s.substr(eq + 1));
        }
        for (std::size_t i = 0; i < options.size(); ++i)
            if (options[i].second->count() > 0) cfg.set_key(values[i].first, values[i].second);
        return cfg;
    }
};

void emit(const bp::Table& t, const bp::RunConfig& cfg, std::uint64_t hash) {
    if (cfg.output.empty()) {
        bp::write_table(std::cout, t, cfg.format, hash);
        return;
    }
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw bp::InputError("cannot open output file '" + cfg.output + "'");
    bp::write_table(out, t, cfg.format, hash);
}

int status_code(const std::string& status) {
    if (status == "ok") return kOk;
    if (status == "scf_failure") return kScf;
    if (status == "resolution_failure") return kResolution;
    return kUsage;
}

struct TwoLevelFlags {
    int k = 1;
    int n = 256;
    double radius = 1.0;
    double start = 0.0;
    double cone = bp::twolevel::kPi / 2.0;
    int monopole_samples = 2048;
    std::string output;
    std::string format = "csv";
};

int run_twolevel(const TwoLevelFlags& f) {
    using namespace bp::twolevel;
    const PlanarLoop loop{f.k, f.radius, f.n, f.start};
    loop.validate();
    const double product = loop_phase_factor(loop);
    const GaugeFunction gauge{0.5, f.k};

    double bmax = 0.0;
    const MatrixFamily family = planar_family();
    for (int s = 0; s < 16; ++s) {
        const double theta = f.start + 2.0 * kPi * s / 16.0;
        const Eigen::Vector3d r(f.radius * std::sin(theta), 0.0, f.radius * std::cos(theta));
        bmax = std::max(bmax, berry_field_real(family, r, 0).cwiseAbs().maxCoeff());
    }

    bp::Table t;
    t.columns = {"winding",           "samples",     "raw_product",      "factor",
                 "gauge_phase",       "gauge_phase_numeric", "monopole_cone_angle", "monopole_phase",
                 "monopole_reference", "bfield_max_abs"};
    t.add_row({static_cast<long long>(f.k), static_cast<long long>(f.n), product,
               static_cast<long long>(product >= 0.0 ? 1 : -1), gauge_phase(gauge, loop),
               gauge_phase_by_integration(gauge, loop), f.cone, monopole_phase(f.cone, f.monopole_samples),
               -kPi * (1.0 - std::cos(f.cone)), bmax});

    bp::RunConfig sink;
    sink.output = f.output;
    sink.set_key("format", f.format);
    const nlohmann::json args = {{"k", f.k}, {"n", f.n}, {"radius", f.radius}, {"start", f.start},
                                 {"cone", f.cone}, {"monopole_samples", f.monopole_samples}};
    emit(t, sink, bp::detail::fnv1a64(args.dump()));
    return kOk;
}

int run_path(const CommonFlags& flags) {
    bp::RunConfig cfg = flags.resolve();
    cfg.validate();
    const bp::PathOutcome o = bp::evaluate_cell(cfg, {cfg.model.U, cfg.model.g, cfg.path});
    emit(bp::path_table({o}), cfg, cfg.hash());
    if (o.status != "ok") std::cerr << "berryphase: " << o.message << '\n';
    return status_code(o.status);
}

int run_gap_profile(const CommonFlags& flags, bool wide) {
    bp::RunConfig cfg = flags.resolve();
    if (wide) cfg.wide = true;
    cfg.validate();
    bp::BerryOptions opts = cfg.berry_options();
    opts.grid = bp::SampleGrid::uniform_with_midpoint;
    opts.check_resolution = false;
    const bp::BerryResult r = bp::berry_factor(cfg.model, cfg.lattice(), cfg.path_spec(), opts);
    bp::Table t = bp::gap_profile_table(r, cfg.wide);
    t.trailer.push_back("degenerate_points=" + std::to_string(r.degeneracy_count) +
                        " factor=" + std::to_string(r.factor));
    emit(t, cfg, cfg.hash());
    return kOk;
}

int run_sweep(const CommonFlags& flags, int workers_flag, const std::vector<std::string>& extra) {
    bp::RunConfig cfg = flags.resolve();
    for (std::size_t i = 0; i + 1 < extra.size(); i += 2)
        if (!extra[i + 1].empty()) cfg.set_key(extra[i], extra[i + 1]);
    cfg.validate();
    if (cfg.sweep_U.empty() || cfg.sweep_g.empty())
        throw bp::InputError("sweep: sweep_U and sweep_g must be non-empty");
    const int workers = workers_flag > 0 ? workers_flag : bp::resolve_workers(cfg.workers);
    const std::vector<bp::PathOutcome> rows = bp::run_sweep(cfg, workers);
    bp::Table t = bp::path_table(rows);
    t.trailer = bp::sign_boundary_summary(rows);
    emit(t, cfg, cfg.hash());
    for (const std::string& line : t.trailer) std::cerr << line << '\n';
    bool failed = false;
    for (const bp::PathOutcome& o : rows) failed = failed || o.status != "ok";
    return failed ? kPartial : kOk;
}

int run_catalog() {
    bp::Table t;
    t.columns = {"name", "segments", "sites", "description"};
    for (const bp::CatalogEntry& e : bp::path_catalog_entries()) {
        std::string sites;
        for (const bp::Site& s : e.sites)
            sites += (sites.empty() ? "" : " ") + std::string("(") + std::to_string(s.x) + "," +
                     std::to_string(s.y) + ")";
        t.add_row({e.name, static_cast<long long>(e.sites.size()), sites, e.description});
    }
    bp::write_csv(std::cout, t, 0);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Berry phase factors of two-level models and of a Hartree-Fock hole polaron"};
    app.require_subcommand(1);

    TwoLevelFlags tl;
    CLI::App* twolevel = app.add_subcommand("twolevel", "planar two-level loop, gauge and monopole phases");
    twolevel->add_option("--k", tl.k, "winding number");
    twolevel->add_option("--n", tl.n, "samples on the loop");
    twolevel->add_option("--radius", tl.radius, "field magnitude |R|");
    twolevel->add_option("--start", tl.start, "start angle");
    twolevel->add_option("--cone", tl.cone, "monopole cone angle");
    twolevel->add_option("--monopole-samples", tl.monopole_samples, "samples on the monopole loop");
    twolevel->add_option("-o,--output", tl.output, "output file (default: stdout)");
    twolevel->add_option("--format", tl.format, "csv | json");

    CommonFlags path_flags, gap_flags, sweep_flags;
    CLI::App* path = app.add_subcommand("path", "Berry phase factor of one loop");
    path_flags.attach(path);

    bool wide = false;
    CLI::App* gap = app.add_subcommand("gap-profile", "HOMO-LUMO gap along a loop, midpoints included");
    gap_flags.attach(gap);
    gap->add_flag("--wide", wide, "append the full single-particle spectrum");

    int workers = 0;
    std::string u_list, g_list, paths;
    CLI::App* sweep = app.add_subcommand("sweep", "factors over a U x g x path grid");
    sweep_flags.attach(sweep);
    sweep->add_option("--U-list", u_list, "JSON list of U values");
    sweep->add_option("--g-list", g_list, "JSON list of g values");
    sweep->add_option("--paths", paths, "comma list or JSON list of path names");
    sweep->add_option("-j,--workers", workers, "worker threads (overrides BERRYPHASE_WORKERS)")
        ->check(CLI::PositiveNumber);

    app.add_subcommand("catalog", "list built-in paths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*twolevel) return run_twolevel(tl);
        if (*path) return run_path(path_flags);
        if (*gap) return run_gap_profile(gap_flags, wide);
        if (*sweep) return run_sweep(sweep_flags, workers, {"sweep_U", u_list, "sweep_g", g_list, "sweep_paths", paths});
        return run_catalog();
    } catch (const bp::InputError& e) {
        std::cerr << "berryphase: " << e.what() << '\n';
        return kUsage;
    } catch (const bp::LookupError& e) {
        std::cerr << "berryphase: " << e.what() << '\n';
        return kUsage;
    } catch (const bp::DegeneracyError& e) {
        std::cerr << "berryphase: " << e.what() << '\n';
        return kUsage;
    } catch (const bp::PathFailure& e) {
        std::cerr << "berryphase: " << e.what() << '\n';
        return kScf;
    } catch (const bp::ConvergenceError& e) {
        std::cerr << "berryphase: " << e.what() << '\n';
        return kScf;
    } catch (const bp::ResolutionError& e) {
        std::cerr << "berryphase: " << e.what() << '\n';
        return kResolution;
    }
}
